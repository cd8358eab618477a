//! Seeded Monte Carlo sweeps over SNR, reference strength `K` or bandwidth.
//!
//! Trial `i` of a run with seed `s` draws everything from the ChaCha8 stream
//! `(s, i)`, so each trial is reproducible on its own and the same channel
//! and noise draws are reused at every sweep point. Trials run on a rayon pool
//! and are reduced in index order, which keeps the output independent of the
//! worker count.

use std::fmt;
use std::io::Write;
use std::path::Path as FsPath;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{assemble_channel, generate_paths, ArrayGeometry, FrequencyGrid, PathConfig};
use crate::crlb::{bound_for, InformationForm, JMode};
use crate::grows::{grows_estimate, GrowsSettings};
use crate::holography::{object_wave, sample_holograms, sample_times, HologramRecord, ReferenceWave};
use crate::recovery::{RecoveryContext, RecoveryMethod};
use crate::whml::{whml_estimate, LikelihoodContext, SolverOptions};
use crate::{Error, Result};

type C = Complex<f64>;

/// NMSE values are floored here so a perfect estimate stays finite.
pub const NMSE_FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing in carrier wavelengths.
    pub spacing_wavelengths: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            rows: 4,
            cols: 4,
            spacing_wavelengths: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub carrier_hz: f64,
    pub spacing_hz: f64,
    /// 12 subcarriers each; ignored when `subcarriers` is given.
    pub resource_blocks: usize,
    pub subcarriers: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 3.5e9,
            spacing_hz: 30e3,
            resource_blocks: 11,
            subcarriers: None,
        }
    }
}

impl GridConfig {
    pub fn n_subcarriers(&self) -> usize {
        self.subcarriers.unwrap_or(12 * self.resource_blocks)
    }
}

/// Whether `A_r = K · max|E_o|` takes the maximum per unit or over the array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMode {
    #[default]
    PerUnit,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HologramConfig {
    /// Samples per symbol; `max(100, N_f)` when absent.
    #[serde(rename = "L")]
    pub samples_per_symbol: Option<usize>,
    pub delta_rad: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub k_mode: KMode,
    /// `null` records noiseless holograms.
    pub snr_db: Option<f64>,
    pub recovery: RecoveryMethod,
}

impl Default for HologramConfig {
    fn default() -> Self {
        Self {
            samples_per_symbol: None,
            delta_rad: std::f64::consts::FRAC_PI_2,
            k: 4.0,
            k_mode: KMode::PerUnit,
            snr_db: Some(10.0),
            recovery: RecoveryMethod::Geometric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Snr,
    K,
    Rb,
}

impl SweepVariable {
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepVariable::Snr => (-2..=6).map(|i| 5.0 * i as f64).collect(),
            SweepVariable::K => vec![2.0, 4.0, 8.0, 16.0],
            SweepVariable::Rb => vec![1.0, 11.0],
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVariable::Snr => "snr",
            SweepVariable::K => "k",
            SweepVariable::Rb => "rb",
        })
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr" => Ok(SweepVariable::Snr),
            "k" => Ok(SweepVariable::K),
            "rb" => Ok(SweepVariable::Rb),
            _ => Err(Error::invalid("sweep", format!("unknown sweep variable `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    #[serde(default)]
    pub values: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            variable: SweepVariable::Snr,
            values: SweepVariable::Snr.default_values(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Grows,
    Whml,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Grows => "grows",
            EstimatorKind::Whml => "whml",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrlbConfig {
    pub enabled: bool,
    pub j_mode: JMode,
    pub form: InformationForm,
}

impl Default for CrlbConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            j_mode: JMode::Quadrature,
            form: InformationForm::Score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub geometry: GeometryConfig,
    pub grid: GridConfig,
    pub paths: PathConfig,
    pub hologram: HologramConfig,
    pub sweep: SweepConfig,
    pub trials: usize,
    pub seed: u64,
    pub estimators: Vec<EstimatorKind>,
    pub crlb: CrlbConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            grid: GridConfig::default(),
            paths: PathConfig::default(),
            hologram: HologramConfig::default(),
            sweep: SweepConfig::default(),
            trials: 100,
            seed: 0,
            estimators: vec![EstimatorKind::Grows, EstimatorKind::Whml],
            crlb: CrlbConfig::default(),
        }
    }
}

impl SimulationConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut config: Self = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        if config.sweep.values.is_empty() {
            config.sweep.values = config.sweep.variable.default_values();
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Switches the swept variable, falling back to its default grid when the
    /// configured values belong to another variable.
    pub fn set_sweep_variable(&mut self, variable: SweepVariable) {
        if self.sweep.variable != variable {
            self.sweep = SweepConfig {
                variable,
                values: variable.default_values(),
            };
        }
    }
}

/// One fully resolved sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: ArrayGeometry<f64>,
    pub grid: FrequencyGrid<f64>,
    pub paths: PathConfig,
    pub samples_per_symbol: usize,
    pub delta: f64,
    pub k: f64,
    pub k_mode: KMode,
    pub snr_db: Option<f64>,
    pub recovery: RecoveryMethod,
    pub estimators: Vec<EstimatorKind>,
    pub solver: SolverOptions<f64>,
}

impl Scenario {
    pub fn from_config(config: &SimulationConfig) -> Result<Self> {
        let g = &config.grid;
        let n_f = g.n_subcarriers();
        let grid = FrequencyGrid::from_spacing(g.carrier_hz, g.spacing_hz, n_f)?;
        let wavelength = crate::channel::SPEED_OF_LIGHT / g.carrier_hz;
        let spacing = config.geometry.spacing_wavelengths * wavelength;
        let geometry = ArrayGeometry::new(config.geometry.rows, config.geometry.cols, spacing, spacing, wavelength)?;
        config.paths.validate()?;
        let h = &config.hologram;
        let samples_per_symbol = h.samples_per_symbol.unwrap_or(n_f.max(100));
        GrowsSettings::<f64>::new(samples_per_symbol, n_f)?;
        if !(h.k > 0.0 && h.k.is_finite()) {
            return Err(Error::invalid("K", "must be positive"));
        }
        if config.estimators.is_empty() {
            return Err(Error::invalid("estimators", "at least one estimator required"));
        }
        let scenario = Self {
            geometry,
            grid,
            paths: config.paths.clone(),
            samples_per_symbol,
            delta: h.delta_rad,
            k: h.k,
            k_mode: h.k_mode,
            snr_db: h.snr_db,
            recovery: h.recovery,
            estimators: config.estimators.clone(),
            solver: SolverOptions::default(),
        };
        if scenario.k <= 1.0 {
            log::warn!("K = {} does not keep the reference above the object wave; expect clamped recoveries", scenario.k);
        }
        Ok(scenario)
    }

    /// The scenario at one value of the swept variable.
    pub fn at(config: &SimulationConfig, variable: SweepVariable, value: f64) -> Result<Self> {
        let mut c = config.clone();
        match variable {
            SweepVariable::Snr => c.hologram.snr_db = Some(value),
            SweepVariable::K => c.hologram.k = value,
            SweepVariable::Rb => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::invalid("rb", "resource block counts must be positive integers"));
                }
                c.grid.resource_blocks = value as usize;
                c.grid.subcarriers = None;
                if c.hologram.samples_per_symbol.is_some_and(|l| l < 12 * value as usize) {
                    c.hologram.samples_per_symbol = None;
                }
            }
        }
        Self::from_config(&c)
    }

    pub fn noise_free(&self) -> bool {
        self.snr_db.is_none()
    }
}

/// `‖ĥ − h‖² / ‖h‖²`
pub fn nmse_ratio(h_hat: &[C], h_true: &[C]) -> Result<f64> {
    if h_hat.len() != h_true.len() {
        return Err(Error::LengthMismatch {
            what: "estimate",
            expected: h_true.len(),
            found: h_hat.len(),
        });
    }
    let power = crate::norm_sqr(h_true);
    if !(power > 0.0) {
        return Err(Error::ZeroChannel);
    }
    let err: f64 = h_hat.iter().zip(h_true).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(err / power)
}

pub fn ratio_to_db(ratio: f64) -> f64 {
    (10.0 * ratio.log10()).max(NMSE_FLOOR_DB)
}

/// `10 log10(‖ĥ − h‖² / ‖h‖²)`, floored at [`NMSE_FLOOR_DB`].
pub fn nmse(h_hat: &[C], h_true: &[C]) -> Result<f64> {
    nmse_ratio(h_hat, h_true).map(ratio_to_db)
}

/// Everything one unit of one trial needs for estimation.
#[derive(Debug, Clone)]
pub struct UnitDraw {
    pub h: Vec<C>,
    pub reference: ReferenceWave<f64>,
    pub noise_variance: f64,
    pub record: HologramRecord<f64>,
}

/// Draws the channel of trial `trial` and records every unit's hologram.
pub fn draw_trial(scenario: &Scenario, seed: u64, trial: u64) -> Result<Vec<UnitDraw>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let geom = &scenario.geometry;
    let grid = &scenario.grid;
    let paths = generate_paths(&scenario.paths, geom.wavelength, &mut rng)?;
    let channel = assemble_channel(&paths, geom, grid, 0.0)?;
    let l_count = scenario.samples_per_symbol;
    let times = sample_times(grid, l_count);
    let snr = scenario.snr_db.map(|db| 10f64.powf(db / 10.0));

    let stats: Vec<(f64, f64)> = (0..geom.n_units())
        .map(|u| {
            let h = channel.unit_row(u);
            let eo: Vec<C> = times[..l_count].iter().map(|&t| object_wave(h, grid, t)).collect();
            let peak = eo.iter().map(|v| v.norm()).fold(0.0, f64::max);
            (peak, crate::norm_sqr(&eo) / l_count as f64)
        })
        .collect();
    let global_peak = stats.iter().map(|s| s.0).fold(0.0, f64::max);

    let mut units = Vec::with_capacity(geom.n_units());
    for (u, &(peak, power)) in stats.iter().enumerate() {
        let h = channel.unit_row(u).to_vec();
        let peak = match scenario.k_mode {
            KMode::PerUnit => peak,
            KMode::Global => global_peak,
        };
        if !(peak > 0.0) {
            return Err(Error::ZeroChannel);
        }
        let reference = ReferenceWave::from_phase_step(scenario.k * peak, grid, scenario.delta)?;
        let noise_variance = match snr {
            Some(s) => power / s,
            None => 0.0,
        };
        let record = sample_holograms(&h, &reference, grid, l_count, noise_variance, geom.unit_coords(u), &mut rng)?;
        units.push(UnitDraw {
            h,
            reference,
            noise_variance,
            record,
        });
    }
    Ok(units)
}

/// Per-estimator totals over units (and, after reduction, trials).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tally {
    pub ratio_sum: f64,
    pub successes: usize,
    pub failures: usize,
    pub clamps: usize,
}

impl Tally {
    fn merge(&mut self, other: &Tally) {
        self.ratio_sum += other.ratio_sum;
        self.successes += other.successes;
        self.failures += other.failures;
        self.clamps += other.clamps;
    }

    pub fn mean_ratio(&self) -> Option<f64> {
        (self.successes > 0).then(|| self.ratio_sum / self.successes as f64)
    }
}

/// NMSE ratios of one unit, in the order of `scenario.estimators`. `None`
/// marks a failed or skipped estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitErrors {
    pub ratios: Vec<Option<f64>>,
    pub clamps: usize,
}

fn estimate_unit(scenario: &Scenario, unit: &UnitDraw) -> UnitErrors {
    let grid = &scenario.grid;
    let grows = RecoveryContext::new(unit.reference)
        .and_then(|ctx| {
            let settings = GrowsSettings::new(scenario.samples_per_symbol, grid.n_subcarriers)?.with_method(scenario.recovery);
            grows_estimate(&ctx, &unit.record, grid, &settings)
        });
    let clamps = grows.as_ref().map(|e| e.diagnostics.clamps).unwrap_or(0);
    let ratios = scenario
        .estimators
        .iter()
        .map(|kind| match kind {
            EstimatorKind::Grows => grows.as_ref().ok().and_then(|e| nmse_ratio(&e.h, &unit.h).ok()),
            EstimatorKind::Whml => {
                if unit.noise_variance <= 0.0 {
                    return None;
                }
                let init = grows.as_ref().ok()?;
                let ctx = LikelihoodContext::from_record(&unit.record, &unit.reference, grid, unit.noise_variance).ok()?;
                match whml_estimate(&init.h, &ctx, &scenario.solver) {
                    Ok(e) => nmse_ratio(&e.h, &unit.h).ok(),
                    Err(err) => {
                        log::debug!("whml failed: {err}");
                        None
                    }
                }
            }
        })
        .collect();
    UnitErrors { ratios, clamps }
}

/// Per-unit errors for trial `trial`; deterministic in `(seed, trial)`.
pub fn run_trial(scenario: &Scenario, seed: u64, trial: u64) -> Result<Vec<UnitErrors>> {
    Ok(draw_trial(scenario, seed, trial)?
        .iter()
        .map(|u| estimate_unit(scenario, u))
        .collect())
}

fn tally_trial(scenario: &Scenario, errors: &[UnitErrors]) -> Vec<Tally> {
    let mut tallies = vec![Tally::default(); scenario.estimators.len()];
    for unit in errors {
        for (i, (t, r)) in tallies.iter_mut().zip(&unit.ratios).enumerate() {
            match r {
                Some(v) => {
                    t.ratio_sum += v;
                    t.successes += 1;
                }
                None => t.failures += 1,
            }
            if scenario.estimators[i] == EstimatorKind::Grows {
                t.clamps += unit.clamps;
            }
        }
    }
    tallies
}

/// CRLB floor on the representative draw: trial 0, unit (0, 0).
pub fn representative_crlb(scenario: &Scenario, seed: u64, j_mode: JMode, form: InformationForm) -> Result<Option<f64>> {
    if scenario.noise_free() {
        return Ok(None);
    }
    let units = draw_trial(scenario, seed, 0)?;
    let u = &units[0];
    let ctx = LikelihoodContext::from_record(&u.record, &u.reference, &scenario.grid, u.noise_variance)?;
    Ok(bound_for(&u.h, &ctx, j_mode, form)?.nmse_floor_db)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_var: String,
    pub value: f64,
    pub estimator: String,
    pub nmse_db: Option<f64>,
    /// CRLB floor of the representative draw of this sweep point.
    pub crlb_db: Option<f64>,
    pub trials: usize,
    pub failures: usize,
    pub clamps: usize,
}

/// Runs every trial of one sweep point on `pool`.
pub fn run_point(
    scenario: &Scenario,
    seed: u64,
    trials: usize,
    pool: &rayon::ThreadPool,
) -> Result<Vec<Tally>> {
    let per_trial: Vec<Result<Vec<UnitErrors>>> = pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|i| run_trial(scenario, seed, i))
            .collect()
    });
    let mut totals = vec![Tally::default(); scenario.estimators.len()];
    for errors in per_trial {
        for (t, x) in totals.iter_mut().zip(tally_trial(scenario, &errors?)) {
            t.merge(&x);
        }
    }
    Ok(totals)
}

/// Runs the configured sweep with `workers` threads (0 picks the rayon default).
pub fn run_sweep(config: &SimulationConfig, workers: usize) -> Result<Vec<ResultRow>> {
    if config.sweep.values.is_empty() {
        return Err(Error::invalid("sweep.values", "sweep grid is empty"));
    }
    if config.trials == 0 {
        return Err(Error::invalid("trials", "must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    let variable = config.sweep.variable;
    let mut rows = Vec::new();
    for &value in &config.sweep.values {
        let scenario = Scenario::at(config, variable, value)?;
        log::info!("{variable} = {value}: {} trials", config.trials);
        let totals = run_point(&scenario, config.seed, config.trials, &pool)?;
        let crlb_db = if config.crlb.enabled {
            match representative_crlb(&scenario, config.seed, config.crlb.j_mode, config.crlb.form) {
                Ok(v) => v,
                Err(e) => {
                    log::warn!("CRLB unavailable at {variable} = {value}: {e}");
                    None
                }
            }
        } else {
            None
        };
        for (kind, t) in scenario.estimators.iter().zip(&totals) {
            if *kind == EstimatorKind::Whml && scenario.noise_free() {
                continue;
            }
            rows.push(ResultRow {
                sweep_var: variable.to_string(),
                value,
                estimator: kind.name().to_string(),
                nmse_db: t.mean_ratio().map(ratio_to_db),
                crlb_db,
                trials: config.trials,
                failures: t.failures,
                clamps: t.clamps,
            });
        }
    }
    Ok(rows)
}

pub fn write_results_csv<W: Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SimulationConfig {
        SimulationConfig {
            geometry: GeometryConfig {
                rows: 2,
                cols: 2,
                spacing_wavelengths: 0.5,
            },
            grid: GridConfig {
                subcarriers: Some(8),
                ..GridConfig::default()
            },
            hologram: HologramConfig {
                samples_per_symbol: Some(8),
                ..HologramConfig::default()
            },
            sweep: SweepConfig {
                variable: SweepVariable::Snr,
                values: vec![0.0, 20.0],
            },
            trials: 3,
            ..SimulationConfig::default()
        }
    }

    #[test]
    fn nmse_examples() {
        let h = vec![C::new(1.0, 0.5), C::new(-0.3, 0.2)];
        assert_eq!(nmse(&h, &h).unwrap(), NMSE_FLOOR_DB);
        assert!(nmse(&[C::new(0.0, 0.0); 2], &h).unwrap().abs() < 1e-12);
        let scaled: Vec<_> = h.iter().map(|v| v * 1.1).collect();
        assert!((nmse(&scaled, &h).unwrap() + 20.0).abs() < 1e-9);
        assert!(matches!(nmse(&h, &[C::new(0.0, 0.0); 2]), Err(Error::ZeroChannel)));
    }

    #[test]
    fn config_defaults_and_paths_in_errors() {
        let c = SimulationConfig::from_json_str("{}").unwrap();
        assert_eq!(c, SimulationConfig::default());
        let s = Scenario::from_config(&c).unwrap();
        assert_eq!(s.grid.n_subcarriers, 132);
        assert_eq!(s.samples_per_symbol, 132);
        assert_eq!(s.geometry.n_units(), 16);

        let c = SimulationConfig::from_json_str(r#"{"hologram": {"L": 64, "K": 8, "delta_rad": 1.0}}"#).unwrap();
        assert_eq!(c.hologram.samples_per_symbol, Some(64));
        assert_eq!(c.hologram.k, 8.0);

        let c = SimulationConfig::from_json_str(r#"{"sweep": {"variable": "k"}}"#).unwrap();
        assert_eq!(c.sweep.values, vec![2.0, 4.0, 8.0, 16.0]);

        match SimulationConfig::from_json_str(r#"{"hologram": {"K": "big"}}"#) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "hologram.K"),
            other => panic!("{other:?}"),
        }
        match SimulationConfig::from_json_str(r#"{"grid": {"carrier": 1}}"#) {
            Err(Error::Config { path, .. }) => assert!(path.starts_with("grid"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scenario_rejects_short_symbol() {
        let mut c = small_config();
        c.hologram.samples_per_symbol = Some(4);
        assert!(matches!(Scenario::from_config(&c), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn empty_sweep_is_an_error() {
        let mut c = small_config();
        c.sweep.values.clear();
        assert!(run_sweep(&c, 1).is_err());
    }

    #[test]
    fn trial_is_deterministic_and_noiseless_is_exact() {
        let mut c = small_config();
        c.hologram.snr_db = None;
        let s = Scenario::from_config(&c).unwrap();
        let a = run_trial(&s, 9, 2).unwrap();
        assert_eq!(a, run_trial(&s, 9, 2).unwrap());
        for u in &a {
            assert!(u.ratios[0].unwrap() < 1e-18);
            assert_eq!(u.ratios[1], None);
        }
    }

    #[test]
    fn low_k_clamps() {
        let mut c = small_config();
        c.hologram.k = 0.5;
        c.hologram.snr_db = Some(10.0);
        c.estimators = vec![EstimatorKind::Grows];
        let s = Scenario::from_config(&c).unwrap();
        let clamps: usize = run_trial(&s, 1, 0).unwrap().iter().map(|u| u.clamps).sum();
        assert!(clamps > 0);
    }

    #[test]
    fn sweep_rows_and_csv() {
        let c = small_config();
        let rows = run_sweep(&c, 2).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.nmse_db.is_some() && r.crlb_db.is_some()));
        let mut buf = Vec::new();
        write_results_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("sweep_var,value,estimator,nmse_db,crlb_db,trials,failures,clamps\n"));
        assert_eq!(rows, run_sweep(&c, 1).unwrap());
    }

    #[test]
    fn global_k_mode_uses_array_peak() {
        let mut c = small_config();
        c.hologram.k_mode = KMode::Global;
        let s = Scenario::from_config(&c).unwrap();
        let units = draw_trial(&s, 3, 0).unwrap();
        let a = units[0].reference.amplitude;
        assert!(units.iter().all(|u| u.reference.amplitude == a));
    }
}
