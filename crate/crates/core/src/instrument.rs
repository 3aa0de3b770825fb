//! Virtual coincidence scanners: a two-filter spectrometer for the spectral
//! intensity and an upconversion delay scanner for the temporal intensity.

use rand::SeedableRng;
use rand_distr::{Distribution, Poisson};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, Intensity2D, Unit};
use crate::model::{wavelength_bw_to_frequency_bw, wavelength_to_frequency, SPEED_OF_LIGHT_NM_THZ};

/// Tunable range of the spectrometer filters, nm.
pub const TUNABLE_BAND_NM: (f64, f64) = (1560.0, 1620.0);

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;
const KERNEL_HALF_WIDTH_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrometerConfig {
    /// Band-pass filter FWHM, nm.
    pub bpf_fwhm: f64,
    /// nm.
    pub scan_center: f64,
    /// nm.
    pub scan_step: f64,
    pub steps_per_axis: usize,
    /// s.
    pub dwell: f64,
    /// Hz.
    pub pair_rate_peak: f64,
    pub efficiency_per_arm: f64,
    /// Hz.
    pub dark_rate: f64,
    /// s.
    pub coincidence_window: f64,
}

impl Default for SpectrometerConfig {
    fn default() -> Self {
        SpectrometerConfig {
            bpf_fwhm: 0.56,
            scan_center: 1584.0,
            scan_step: 0.5,
            steps_per_axis: 60,
            dwell: 5.0,
            pair_rate_peak: 2.0e3,
            efficiency_per_arm: 0.2,
            dark_rate: 2.0e3,
            coincidence_window: 1.0e-9,
        }
    }
}

fn check_positive(what: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be positive, got {v}")))
    }
}

fn check_non_negative(what: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be non-negative, got {v}")))
    }
}

fn check_in_band(what: &'static str, nm: f64) -> Result<()> {
    let (lo, hi) = TUNABLE_BAND_NM;
    if (lo - 1e-9..=hi + 1e-9).contains(&nm) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value: nm,
            min: lo,
            max: hi,
        })
    }
}

impl SpectrometerConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("bpf_fwhm", self.bpf_fwhm)?;
        check_positive("scan_step", self.scan_step)?;
        check_positive("dwell", self.dwell)?;
        check_non_negative("pair_rate_peak", self.pair_rate_peak)?;
        check_non_negative("dark_rate", self.dark_rate)?;
        check_positive("coincidence_window", self.coincidence_window)?;
        if !(self.efficiency_per_arm > 0.0 && self.efficiency_per_arm <= 1.0) {
            return Err(Error::OutOfRange {
                what: "efficiency_per_arm",
                value: self.efficiency_per_arm,
                min: 0.0,
                max: 1.0,
            });
        }
        if self.steps_per_axis < 2 {
            return Err(Error::invalid("steps_per_axis must be at least 2"));
        }
        let axis = self.scan_axis()?;
        check_in_band("scan start", axis.first())?;
        check_in_band("scan end", axis.last())?;
        Ok(())
    }

    /// Filter center wavelengths, nm, shared by both arms.
    pub fn scan_axis(&self) -> Result<Axis> {
        Axis::new(self.scan_center, self.scan_step, self.steps_per_axis, Unit::Nm)
    }

    /// Filter FWHM in THz at the scan center.
    pub fn bpf_fwhm_thz(&self) -> f64 {
        wavelength_bw_to_frequency_bw(self.scan_center, self.bpf_fwhm)
    }

    /// Accidental coincidence rate, Hz.
    pub fn accidental_rate(&self) -> f64 {
        self.dark_rate * self.dark_rate * self.coincidence_window
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UpconversionConfig {
    /// ps.
    pub delay_step: f64,
    pub steps_per_axis: usize,
    /// ps.
    pub two_photon_resolution_fwhm: f64,
    /// Expected background counts per scan point.
    pub background_rate: f64,
    /// Hz.
    pub pair_rate_peak: f64,
    /// s.
    pub dwell: f64,
}

impl Default for UpconversionConfig {
    fn default() -> Self {
        UpconversionConfig {
            delay_step: 0.13,
            steps_per_axis: 76,
            two_photon_resolution_fwhm: 0.48,
            background_rate: 5.0,
            pair_rate_peak: 100.0,
            dwell: 5.0,
        }
    }
}

impl UpconversionConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("delay_step", self.delay_step)?;
        check_positive("two_photon_resolution_fwhm", self.two_photon_resolution_fwhm)?;
        check_non_negative("background_rate", self.background_rate)?;
        check_non_negative("pair_rate_peak", self.pair_rate_peak)?;
        check_positive("dwell", self.dwell)?;
        if self.steps_per_axis < 2 {
            return Err(Error::invalid("steps_per_axis must be at least 2"));
        }
        Ok(())
    }

    /// Delay settings, ps, centered on zero delay.
    pub fn scan_axis(&self) -> Result<Axis> {
        Axis::new(0.0, self.delay_step, self.steps_per_axis, Unit::Ps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "instrument", rename_all = "snake_case")]
pub enum ScanConfig {
    Spectrometer(SpectrometerConfig),
    Upconversion(UpconversionConfig),
}

/// Integer coincidence counts from one scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub axis_1: Axis,
    pub axis_2: Axis,
    /// Row-major in `axis_1`.
    pub counts: Vec<u64>,
    pub seed: u64,
    pub config: ScanConfig,
}

impl ScanResult {
    pub fn dims(&self) -> (usize, usize) {
        (self.axis_1.len(), self.axis_2.len())
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.axis_2.len() + j]
    }

    /// Expected counts per point that do not come from the biphoton.
    pub fn floor(&self) -> f64 {
        match &self.config {
            ScanConfig::Spectrometer(c) => c.accidental_rate() * c.dwell,
            ScanConfig::Upconversion(c) => c.background_rate,
        }
    }

    /// Gaussian instrument FWHM per axis in field units (THz or ps).
    pub fn instrument_fwhm(&self) -> f64 {
        match &self.config {
            ScanConfig::Spectrometer(c) => c.bpf_fwhm_thz(),
            ScanConfig::Upconversion(c) => c.two_photon_resolution_fwhm,
        }
    }

    /// Counts as an intensity map on THz or ps axes, optionally with the
    /// known floor removed.
    pub fn to_field(&self, subtract_floor: bool) -> Result<Intensity2D> {
        let floor = if subtract_floor { self.floor() } else { 0.0 };
        let values: Vec<f64> = self.counts.iter().map(|&c| c as f64 - floor).collect();
        let field = Intensity2D::new(self.axis_1, self.axis_2, values)?;
        match self.axis_1.unit() {
            Unit::Nm => nm_scan_to_frequency(&field),
            _ => Ok(field),
        }
    }
}

/// Maps a wavelength-scanned map onto frequency axes, linearized around each
/// axis center. Both axes are reversed so frequency increases with index.
pub fn nm_scan_to_frequency(field: &Intensity2D) -> Result<Intensity2D> {
    let convert = |a: &Axis| {
        if a.unit() != Unit::Nm {
            return Err(Error::invalid(format!("expected nm axis, got {}", a.unit())));
        }
        Axis::new(
            wavelength_to_frequency(a.center()),
            SPEED_OF_LIGHT_NM_THZ * a.step() / (a.center() * a.center()),
            a.len(),
            Unit::THz,
        )
    };
    let (ax1, ax2) = (convert(field.axis_1())?, convert(field.axis_2())?);
    let (n1, n2) = field.dims();
    let mut values = Vec::with_capacity(n1 * n2);
    for i in (0..n1).rev() {
        values.extend(field.row(i).iter().rev());
    }
    Intensity2D::new(ax1, ax2, values)
}

/// Normalized Gaussian weights on `axis` for each sample point: the start
/// index and the weights from there. The normalization is the lattice sum
/// over all integers, so weights that fall off the grid are lost rather than
/// redistributed. A zero FWHM gives linear interpolation.
fn axis_weights(axis: &Axis, points: &[f64], fwhms: &[f64]) -> Vec<(usize, Vec<f64>)> {
    let n = axis.len() as isize;
    let h = axis.step();
    points
        .iter()
        .zip(fwhms)
        .map(|(&p, &fwhm)| {
            let pos = axis.position(p);
            let (lo, hi, weight): (isize, isize, Box<dyn Fn(isize) -> f64>) = if fwhm <= 0.0 {
                let k0 = pos.floor() as isize;
                (k0, k0 + 1, Box::new(move |k: isize| (1.0 - (k as f64 - pos).abs()).max(0.0)))
            } else {
                let sigma = fwhm / FWHM_PER_SIGMA / h;
                let reach = (KERNEL_HALF_WIDTH_SIGMAS * sigma).ceil().max(1.0) as isize;
                let g = move |k: isize| {
                    let d = (k as f64 - pos) / sigma;
                    (-0.5 * d * d).exp()
                };
                let norm: f64 = (pos.floor() as isize - reach..=pos.ceil() as isize + reach).map(g).sum();
                (pos.floor() as isize - reach, pos.ceil() as isize + reach, Box::new(move |k| g(k) / norm))
            };
            let start = lo.max(0);
            let end = hi.min(n - 1);
            if end < start {
                return (0, Vec::new());
            }
            (start as usize, (start..=end).map(weight).collect())
        })
        .collect()
}

/// `E[i][j] = Σ_k Σ_l K₁[i][k] F[k][l] K₂[j][l]`, row-major in `i`.
fn separable_sample(field: &Intensity2D, k1: &[(usize, Vec<f64>)], k2: &[(usize, Vec<f64>)]) -> Vec<f64> {
    let (n1, _) = field.dims();
    let m2 = k2.len();
    let mut needed = vec![false; n1];
    for (s, w) in k1 {
        needed[*s..*s + w.len()].iter_mut().for_each(|x| *x = true);
    }
    // Partial products along axis 2 for the rows that matter.
    let partial: Vec<Option<Vec<f64>>> = (0..n1)
        .into_par_iter()
        .map(|k| {
            needed[k].then(|| {
                let row = field.row(k);
                k2.iter()
                    .map(|(s, w)| w.iter().zip(&row[*s..*s + w.len()]).map(|(a, b)| a * b).sum())
                    .collect()
            })
        })
        .collect();
    k1.par_iter()
        .flat_map_iter(|(s, w)| {
            let mut out = vec![0.0; m2];
            for (wk, k) in w.iter().zip(*s..) {
                if let Some(row) = &partial[k] {
                    out.iter_mut().zip(row).for_each(|(o, r)| *o += wk * r);
                }
            }
            out
        })
        .collect()
}

/// Separable Gaussian blur with per-axis FWHMs, on the field's own grid.
pub fn response_convolve(field: &Intensity2D, fwhm_1: f64, fwhm_2: f64) -> Result<Intensity2D> {
    check_non_negative("fwhm_1", fwhm_1)?;
    check_non_negative("fwhm_2", fwhm_2)?;
    let c1 = field.axis_1().coords();
    let c2 = field.axis_2().coords();
    let k1 = axis_weights(field.axis_1(), &c1, &vec![fwhm_1; c1.len()]);
    let k2 = axis_weights(field.axis_2(), &c2, &vec![fwhm_2; c2.len()]);
    Intensity2D::new(*field.axis_1(), *field.axis_2(), separable_sample(field, &k1, &k2))
}

fn check_thz(field: &Intensity2D) -> Result<()> {
    if field.axis_1().unit() != Unit::THz || field.axis_2().unit() != Unit::THz {
        return Err(Error::invalid("spectral intensity must be on THz axes"));
    }
    Ok(())
}

fn check_ps(field: &Intensity2D) -> Result<()> {
    if field.axis_1().unit() != Unit::Ps || field.axis_2().unit() != Unit::Ps {
        return Err(Error::invalid("temporal intensity must be on ps axes"));
    }
    Ok(())
}

fn peak_of(field: &Intensity2D) -> Result<f64> {
    let peak = field.peak();
    if !(peak > 0.0) {
        return Err(Error::invalid("intensity has no positive peak"));
    }
    Ok(peak)
}

/// Expected rates, Hz, for filters centered at each pair of wavelengths.
fn tsi_rates(tsi: &Intensity2D, cfg: &SpectrometerConfig, centers_1: &[f64], centers_2: &[f64]) -> Result<Vec<f64>> {
    check_thz(tsi)?;
    let peak = peak_of(tsi)?;
    let nu = |c: &[f64]| -> Vec<f64> { c.iter().map(|&l| wavelength_to_frequency(l)).collect() };
    let widths = |c: &[f64]| -> Vec<f64> { c.iter().map(|&l| wavelength_bw_to_frequency_bw(l, cfg.bpf_fwhm)).collect() };
    let k1 = axis_weights(tsi.axis_1(), &nu(centers_1), &widths(centers_1));
    let k2 = axis_weights(tsi.axis_2(), &nu(centers_2), &widths(centers_2));
    let scale = cfg.pair_rate_peak * cfg.efficiency_per_arm * cfg.efficiency_per_arm / peak;
    let floor = cfg.accidental_rate();
    Ok(separable_sample(tsi, &k1, &k2).into_iter().map(|v| scale * v + floor).collect())
}

/// Expected coincidence rate, Hz, with the two filters centered at the
/// given wavelengths.
pub fn expected_tsi_response(tsi: &Intensity2D, cfg: &SpectrometerConfig, center_1: f64, center_2: f64) -> Result<f64> {
    check_in_band("filter 1 center", center_1)?;
    check_in_band("filter 2 center", center_2)?;
    Ok(tsi_rates(tsi, cfg, &[center_1], &[center_2])?[0])
}

/// Expected counts over the whole spectrometer scan.
pub fn expected_tsi_scan(tsi: &Intensity2D, cfg: &SpectrometerConfig) -> Result<Intensity2D> {
    cfg.validate()?;
    let axis = cfg.scan_axis()?;
    let c = axis.coords();
    let rates = tsi_rates(tsi, cfg, &c, &c)?;
    Intensity2D::new(axis, axis, rates.into_iter().map(|r| r * cfg.dwell).collect())
}

/// Expected counts over the whole delay scan.
pub fn expected_tti_scan(tti: &Intensity2D, cfg: &UpconversionConfig) -> Result<Intensity2D> {
    cfg.validate()?;
    check_ps(tti)?;
    let peak = peak_of(tti)?;
    let axis = cfg.scan_axis()?;
    let c = axis.coords();
    let widths = vec![cfg.two_photon_resolution_fwhm; c.len()];
    let k1 = axis_weights(tti.axis_1(), &c, &widths);
    let k2 = axis_weights(tti.axis_2(), &c, &widths);
    let scale = cfg.pair_rate_peak * cfg.dwell / peak;
    let values = separable_sample(tti, &k1, &k2)
        .into_iter()
        .map(|v| scale * v + cfg.background_rate)
        .collect();
    Intensity2D::new(axis, axis, values)
}

/// Independent random stream for one scan point.
fn point_rng(seed: u64, i: usize, j: usize) -> Pcg64 {
    let mut z = seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (j as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    Pcg64::seed_from_u64(z ^ (z >> 31))
}

/// Poisson draws around an expected-count map, one stream per point.
pub fn poisson_counts(expected: &Intensity2D, seed: u64) -> Vec<u64> {
    let n2 = expected.axis_2().len();
    expected
        .values()
        .par_iter()
        .enumerate()
        .map(|(idx, &mean)| {
            if mean <= 0.0 {
                return 0;
            }
            let mut rng = point_rng(seed, idx / n2, idx % n2);
            Poisson::new(mean).map(|d| d.sample(&mut rng) as u64).unwrap_or(0)
        })
        .collect()
}

pub fn simulate_tsi_scan(tsi: &Intensity2D, cfg: &SpectrometerConfig, seed: u64) -> Result<ScanResult> {
    let expected = expected_tsi_scan(tsi, cfg)?;
    Ok(ScanResult {
        axis_1: *expected.axis_1(),
        axis_2: *expected.axis_2(),
        counts: poisson_counts(&expected, seed),
        seed,
        config: ScanConfig::Spectrometer(*cfg),
    })
}

pub fn simulate_tti_scan(tti: &Intensity2D, cfg: &UpconversionConfig, seed: u64) -> Result<ScanResult> {
    let expected = expected_tti_scan(tti, cfg)?;
    Ok(ScanResult {
        axis_1: *expected.axis_1(),
        axis_2: *expected.axis_2(),
        counts: poisson_counts(&expected, seed),
        seed,
        config: ScanConfig::Upconversion(*cfg),
    })
}
