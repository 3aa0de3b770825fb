//! Two-photon spectral amplitude: a pump envelope in `ν₁ + ν₂` times a sinc
//! phase-matching function in `ν₁ - ν₂`, plus the closed-form temporal
//! amplitude for a Gaussian pump.
//!
//! Frequencies are offsets from the carrier in THz and times are in ps, so
//! `THz · ps = 1`. The Fourier kernel is `exp(∓2πiνt)` with unit prefactor.

use std::f64::consts::{LN_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, Field2D, Unit};

/// Speed of light in nm·THz.
pub const SPEED_OF_LIGHT_NM_THZ: f64 = 299_792.458;

/// Positive root of `sinc²(x) = 1/2`.
pub const SINC_SQ_HALF_MAX: f64 = 1.391_557_378_251_51;

/// Gaussian component share of the total pump bandwidth for a filtered
/// (near-rectangular) pump when nothing else is specified.
pub const DEFAULT_GAUSS_RECT_GAUSSIAN_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpShape {
    Gaussian,
    GaussRect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub shape: PumpShape,
    /// Coefficient of `exp[-a (ν₁+ν₂)²]`, THz⁻².
    pub a: f64,
    /// Full width of the rectangle convolved with the Gaussian, THz.
    pub rect_full_width: f64,
    /// Informational: pump center wavelength, nm.
    pub center_wavelength: f64,
    /// Informational: pump intensity FWHM, nm.
    pub bandwidth_fwhm: f64,
}

impl PumpSpec {
    pub fn gaussian(a: f64) -> Result<Self> {
        let pump = PumpSpec {
            shape: PumpShape::Gaussian,
            a,
            rect_full_width: 0.0,
            center_wavelength: 0.0,
            bandwidth_fwhm: 0.0,
        };
        pump.validate()?;
        Ok(pump)
    }

    /// Gaussian pump whose intensity spectrum has the given FWHM.
    pub fn gaussian_from_bandwidth(center_nm: f64, bandwidth_nm: f64) -> Result<Self> {
        check_wavelengths(center_nm, bandwidth_nm)?;
        let dnu = wavelength_bw_to_frequency_bw(center_nm, bandwidth_nm);
        let mut pump = PumpSpec::gaussian(2.0 * LN_2 / (dnu * dnu))?;
        pump.center_wavelength = center_nm;
        pump.bandwidth_fwhm = bandwidth_nm;
        Ok(pump)
    }

    pub fn gauss_rect(a: f64, rect_full_width: f64) -> Result<Self> {
        let pump = PumpSpec {
            shape: PumpShape::GaussRect,
            a,
            rect_full_width,
            center_wavelength: 0.0,
            bandwidth_fwhm: 0.0,
        };
        pump.validate()?;
        Ok(pump)
    }

    /// Gaussian ⊗ rectangle pump whose intensity FWHM matches the given
    /// bandwidth, with the Gaussian component's intensity FWHM fixed to
    /// `gaussian_fraction` of the total.
    pub fn gauss_rect_from_bandwidth(center_nm: f64, bandwidth_nm: f64, gaussian_fraction: f64) -> Result<Self> {
        check_wavelengths(center_nm, bandwidth_nm)?;
        if !(gaussian_fraction > 0.0 && gaussian_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "gaussian fraction must lie in (0, 1), got {gaussian_fraction}"
            )));
        }
        let total = wavelength_bw_to_frequency_bw(center_nm, bandwidth_nm);
        let g = gaussian_fraction * total;
        let a = 2.0 * LN_2 / (g * g);
        // Intensity FWHM grows monotonically with the rectangle width.
        let fwhm_for = |w: f64| PumpSpec::gauss_rect(a, w).map(|p| p.intensity_fwhm());
        let (mut lo, mut hi) = (1e-9 * total, 2.0 * total);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if fwhm_for(mid)? < total {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 * total {
                break;
            }
        }
        let mut pump = PumpSpec::gauss_rect(a, 0.5 * (lo + hi))?;
        pump.center_wavelength = center_nm;
        pump.bandwidth_fwhm = bandwidth_nm;
        Ok(pump)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::invalid(format!("pump coefficient a must be positive, got {}", self.a)));
        }
        if !(self.rect_full_width.is_finite() && self.rect_full_width >= 0.0) {
            return Err(Error::invalid("rect_full_width must be non-negative"));
        }
        if self.shape == PumpShape::GaussRect && self.rect_full_width <= 0.0 {
            return Err(Error::invalid("gauss_rect pump needs rect_full_width > 0"));
        }
        Ok(())
    }

    /// FWHM of `|α(ν)|²` in the pump (sum) frequency, THz.
    pub fn intensity_fwhm(&self) -> f64 {
        match self.shape {
            PumpShape::Gaussian => (2.0 * LN_2 / self.a).sqrt(),
            PumpShape::GaussRect => {
                // |α|² is even and decreasing for ν > 0.
                let target = std::f64::consts::FRAC_1_SQRT_2;
                let mut hi = self.rect_full_width + 10.0 / self.a.sqrt();
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if pump_envelope(self, mid) > target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo + hi
            }
        }
    }
}

fn check_wavelengths(center_nm: f64, bandwidth_nm: f64) -> Result<()> {
    if !(center_nm.is_finite() && center_nm > 0.0) {
        return Err(Error::invalid(format!("center wavelength must be positive, got {center_nm}")));
    }
    if !(bandwidth_nm.is_finite() && bandwidth_nm > 0.0) {
        return Err(Error::invalid(format!("bandwidth must be positive, got {bandwidth_nm}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchSpec {
    /// Coefficient of `sinc[b (ν₁-ν₂)]`, THz⁻¹.
    pub b: f64,
    /// Crystal length label, mm. Metadata only.
    pub crystal_length_label: f64,
}

impl PhaseMatchSpec {
    pub fn new(b: f64) -> Result<Self> {
        let pm = PhaseMatchSpec {
            b,
            crystal_length_label: 0.0,
        };
        pm.validate()?;
        Ok(pm)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::invalid(format!("phase-matching coefficient b must be positive, got {}", self.b)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiphotonModel {
    pub pump: PumpSpec,
    pub pm: PhaseMatchSpec,
}

impl BiphotonModel {
    pub fn new(pump: PumpSpec, pm: PhaseMatchSpec) -> Result<Self> {
        pump.validate()?;
        pm.validate()?;
        Ok(BiphotonModel { pump, pm })
    }

    /// Gaussian pump with coefficients `a` (THz⁻²) and `b` (THz⁻¹).
    pub fn gaussian(a: f64, b: f64) -> Result<Self> {
        BiphotonModel::new(PumpSpec::gaussian(a)?, PhaseMatchSpec::new(b)?)
    }

    pub fn a(&self) -> f64 {
        self.pump.a
    }

    pub fn b(&self) -> f64 {
        self.pm.b
    }

    /// Intensity FWHM of the spectral distribution along `ν₊`.
    pub fn dnu_plus(&self) -> f64 {
        self.pump.intensity_fwhm() / SQRT_2
    }

    /// Intensity FWHM of the spectral distribution along `ν₋`.
    pub fn dnu_minus(&self) -> f64 {
        2.0 * SINC_SQ_HALF_MAX / (SQRT_2 * self.pm.b)
    }

    /// Intensity FWHM along `τ₊` for a Gaussian pump; for a filtered pump
    /// this is the Gaussian-equivalent estimate from the spectral width.
    pub fn dtau_plus(&self) -> f64 {
        2.0 * LN_2 / (PI * self.dnu_plus())
    }

    /// Full width of the temporal rectangle along `τ₋`.
    pub fn dtau_minus(&self) -> f64 {
        SQRT_2 * self.pm.b / PI
    }
}

/// `erf(u) - erf(v)` without cancellation when both arguments share a sign.
fn erf_diff(u: f64, v: f64) -> f64 {
    if u > 0.0 && v > 0.0 {
        libm::erfc(v) - libm::erfc(u)
    } else if u < 0.0 && v < 0.0 {
        libm::erfc(-u) - libm::erfc(-v)
    } else {
        libm::erf(u) - libm::erf(v)
    }
}

/// Pump envelope `α(ν₁+ν₂)`, real and peak-normalized.
pub fn pump_envelope(pump: &PumpSpec, nu_sum: f64) -> f64 {
    match pump.shape {
        PumpShape::Gaussian => (-pump.a * nu_sum * nu_sum).exp(),
        PumpShape::GaussRect => {
            // exp(-a x²) convolved with a unit rectangle of width w, divided by its value at 0.
            let s = pump.a.sqrt();
            let half = 0.5 * pump.rect_full_width;
            let z = s * half;
            if z < 1e-4 {
                // Width negligible against the Gaussian: second-order expansion
                // of the box average of exp(-a x²) around x.
                let x2 = nu_sum * nu_sum;
                let corr = 1.0 + (half * half / 3.0) * pump.a * (2.0 * pump.a * x2 - 1.0);
                let corr0 = 1.0 - (half * half / 3.0) * pump.a;
                return (-pump.a * x2).exp() * corr / corr0;
            }
            erf_diff(s * (nu_sum + half), s * (nu_sum - half)) / (2.0 * libm::erf(z))
        }
    }
}

/// Unnormalized sinc, `sin(x)/x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Phase-matching function `sinc[b (ν₁-ν₂)]`.
pub fn phase_matching(pm: &PhaseMatchSpec, nu_diff: f64) -> f64 {
    sinc(pm.b * nu_diff)
}

/// Two-photon spectral amplitude on THz axes, evaluated on offsets from
/// each axis center.
pub fn jsa(model: &BiphotonModel, axis_1: &Axis, axis_2: &Axis) -> Result<Field2D> {
    if axis_1.unit() != Unit::THz || axis_2.unit() != Unit::THz {
        return Err(Error::invalid(format!(
            "spectral amplitude needs THz axes, got {} and {}",
            axis_1.unit(),
            axis_2.unit()
        )));
    }
    let o1 = axis_1.offsets();
    let o2 = axis_2.offsets();
    let mut values = Vec::with_capacity(o1.len() * o2.len());
    if axis_1.same_sampling(axis_2) {
        // Sums and differences live on a lattice of 2n-1 values.
        let n = o1.len();
        let h = axis_1.step();
        let lattice = |m: usize| (m as f64 - (n as f64 - 1.0)) * h;
        let pump: Vec<f64> = (0..2 * n - 1).map(|m| pump_envelope(&model.pump, lattice(m))).collect();
        let pm: Vec<f64> = (0..2 * n - 1).map(|m| phase_matching(&model.pm, lattice(m))).collect();
        for i in 0..n {
            values.extend((0..n).map(|j| Complex64::new(pump[i + j] * pm[i + n - 1 - j], 0.0)));
        }
    } else {
        for &x in &o1 {
            values.extend(
                o2.iter()
                    .map(|&y| Complex64::new(pump_envelope(&model.pump, x + y) * phase_matching(&model.pm, x - y), 0.0)),
            );
        }
    }
    Field2D::new(*axis_1, *axis_2, values)
}

/// Closed-form temporal amplitude for a Gaussian pump, peak-normalized:
/// `exp[-π²(t₁+t₂)²/(4a)] · rect(π(t₁-t₂)/(2b))`, i.e. nonzero for
/// `|t₁ - t₂| ≤ b/π`.
pub fn analytic_jta(model: &BiphotonModel, axis_1: &Axis, axis_2: &Axis) -> Result<Field2D> {
    if model.pump.shape != PumpShape::Gaussian {
        return Err(Error::Unsupported(
            "closed-form temporal amplitude exists only for a Gaussian pump; transform the spectral amplitude instead"
                .into(),
        ));
    }
    if axis_1.unit() != Unit::Ps || axis_2.unit() != Unit::Ps {
        return Err(Error::invalid(format!(
            "temporal amplitude needs ps axes, got {} and {}",
            axis_1.unit(),
            axis_2.unit()
        )));
    }
    let a = model.a();
    let half_width = model.b() / PI;
    let o1 = axis_1.offsets();
    let o2 = axis_2.offsets();
    let mut values = Vec::with_capacity(o1.len() * o2.len());
    for &t1 in &o1 {
        values.extend(o2.iter().map(|&t2| {
            if (t1 - t2).abs() <= half_width {
                let s = t1 + t2;
                Complex64::new((-PI * PI * s * s / (4.0 * a)).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }));
    }
    Field2D::new(*axis_1, *axis_2, values)
}

/// Gaussian-pump model whose spectral intensity has FWHM `target_dnu_plus`
/// along `ν₊` and `target_dnu_minus` along `ν₋`.
pub fn calibrate(target_dnu_plus: f64, target_dnu_minus: f64) -> Result<BiphotonModel> {
    if !(target_dnu_plus.is_finite() && target_dnu_plus > 0.0) {
        return Err(Error::invalid(format!("target dnu_plus must be positive, got {target_dnu_plus}")));
    }
    if !(target_dnu_minus.is_finite() && target_dnu_minus > 0.0) {
        return Err(Error::invalid(format!("target dnu_minus must be positive, got {target_dnu_minus}")));
    }
    let a = LN_2 / (target_dnu_plus * target_dnu_plus);
    let b = SQRT_2 * SINC_SQ_HALF_MAX / target_dnu_minus;
    BiphotonModel::gaussian(a, b)
}

/// Converts a wavelength bandwidth to a frequency bandwidth at `center`:
/// `c · bw / center²`, in THz for nm inputs.
pub fn wavelength_bw_to_frequency_bw(center_nm: f64, bw_nm: f64) -> f64 {
    SPEED_OF_LIGHT_NM_THZ * bw_nm / (center_nm * center_nm)
}

/// Optical frequency in THz for a vacuum wavelength in nm.
pub fn wavelength_to_frequency(wavelength_nm: f64) -> f64 {
    SPEED_OF_LIGHT_NM_THZ / wavelength_nm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_centered_axis;

    /// Root of sin(x)/x = 1/√2 on (0, π) by bisection.
    fn sinc_half_root_oracle() -> f64 {
        let f = |x: f64| x.sin() / x - std::f64::consts::FRAC_1_SQRT_2;
        let (mut lo, mut hi) = (0.5, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn sinc_half_max_constant_matches_root() {
        assert!((SINC_SQ_HALF_MAX - sinc_half_root_oracle()).abs() < 1e-14);
        assert!((2.0 * SINC_SQ_HALF_MAX / SQRT_2 - 1.9680).abs() < 1e-4);
    }

    #[test]
    fn pump_envelope_gaussian() {
        let p = PumpSpec::gaussian(0.37).unwrap();
        assert_eq!(pump_envelope(&p, 0.0), 1.0);
        let p = PumpSpec::gaussian(0.04).unwrap();
        let x = (LN_2 / 0.08).sqrt();
        let amp = pump_envelope(&p, x);
        assert!((amp * amp - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gauss_rect_degenerates_to_gaussian() {
        let g = PumpSpec::gaussian(0.3).unwrap();
        for w in [1e-7, 1e-5] {
            let r = PumpSpec::gauss_rect(0.3, w).unwrap();
            for k in -40..=40 {
                let x = k as f64 * 0.1;
                assert!((pump_envelope(&r, x) - pump_envelope(&g, x)).abs() < 1e-9, "w={w} x={x}");
            }
        }
    }

    #[test]
    fn gauss_rect_matches_numeric_convolution() {
        let p = PumpSpec::gauss_rect(2.0, 1.5).unwrap();
        // Midpoint quadrature of exp(-a (x-u)²) over the rectangle.
        let conv = |x: f64| {
            let m = 20_000;
            let h = 1.5 / m as f64;
            (0..m).map(|i| (-2.0 * (x - (-0.75 + (i as f64 + 0.5) * h)).powi(2)).exp()).sum::<f64>() * h
        };
        let c0 = conv(0.0);
        for x in [0.0, 0.3, 0.75, 1.2, 2.5] {
            assert!((pump_envelope(&p, x) - conv(x) / c0).abs() < 1e-8);
        }
    }

    #[test]
    fn gauss_rect_from_bandwidth_hits_target() {
        let p = PumpSpec::gauss_rect_from_bandwidth(792.0, 2.8, 0.2).unwrap();
        let target = wavelength_bw_to_frequency_bw(792.0, 2.8);
        assert!((p.intensity_fwhm() / target - 1.0).abs() < 1e-9);
        let g_fwhm = (2.0 * LN_2 / p.a).sqrt();
        assert!((g_fwhm / target - 0.2).abs() < 1e-12);
    }

    #[test]
    fn phase_matching_examples() {
        let pm = PhaseMatchSpec::new(3.3).unwrap();
        assert_eq!(phase_matching(&pm, 0.0), 1.0);
        assert!(phase_matching(&pm, PI / 3.3).abs() < 1e-15);
        let v = phase_matching(&pm, 1.391_56 / 3.3);
        assert!((v * v - 0.5).abs() < 1e-4);
        assert!((sinc(1e-5) - (1e-5f64).sin() / 1e-5).abs() < 1e-15);
    }

    #[test]
    fn jsa_peak_symmetry_and_rotated_separability() {
        let m = BiphotonModel::gaussian(0.0951, 14.06).unwrap();
        let ax = make_centered_axis(0.0, 4.0, 81, Unit::THz).unwrap();
        let f = jsa(&m, &ax, &ax).unwrap();
        assert!((f.get(40, 40).re - 1.0).abs() < 1e-15);
        for i in 0..81 {
            for j in 0..81 {
                assert_eq!(f.get(i, j), f.get(j, i));
                let (p, q) = crate::grid::to_rotated(ax.coord(i), ax.coord(j));
                let expect = pump_envelope(&m.pump, SQRT_2 * p) * sinc(SQRT_2 * m.b() * q);
                assert!((f.get(i, j).re - expect).abs() < 1e-12);
            }
        }
        // Non-square grid takes the direct path and agrees.
        let ay = make_centered_axis(0.0, 3.0, 31, Unit::THz).unwrap();
        let g = jsa(&m, &ax, &ay).unwrap();
        let k = ay.nearest_index(ax.coord(50)).unwrap();
        let expect = pump_envelope(&m.pump, ax.coord(50) + ay.coord(k)) * sinc(m.b() * (ax.coord(50) - ay.coord(k)));
        assert!((g.get(50, k).re - expect).abs() < 1e-15);
    }

    #[test]
    fn jsa_rejects_time_axes() {
        let m = BiphotonModel::gaussian(0.04, 4.0).unwrap();
        let t = make_centered_axis(0.0, 4.0, 8, Unit::Ps).unwrap();
        assert!(matches!(jsa(&m, &t, &t), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn jsa_uses_offsets_from_carrier() {
        let m = BiphotonModel::gaussian(0.04, 4.0).unwrap();
        let base = make_centered_axis(0.0, 4.0, 21, Unit::THz).unwrap();
        let carrier = base.recentered(wavelength_to_frequency(1584.0));
        assert_eq!(jsa(&m, &base, &base).unwrap().values(), jsa(&m, &carrier, &carrier).unwrap().values());
    }

    #[test]
    fn analytic_jta_examples() {
        let m = BiphotonModel::gaussian(0.04, 4.0).unwrap();
        let ax = make_centered_axis(0.0, 4.0, 401, Unit::Ps).unwrap();
        let f = analytic_jta(&m, &ax, &ax).unwrap();
        assert_eq!(f.get(200, 200).re, 1.0);
        let edge = 4.0 / PI;
        for i in 0..401 {
            for j in 0..401 {
                let d = (ax.coord(i) - ax.coord(j)).abs();
                if d > edge {
                    assert_eq!(f.get(i, j).re, 0.0);
                }
            }
        }
        // Just inside the edge on the anti-diagonal the amplitude is the Gaussian value.
        let t = 0.5 * edge - 0.005;
        let k1 = ax.nearest_index(t).unwrap();
        let k2 = ax.nearest_index(-t).unwrap();
        assert!(f.get(k1, k2).re > 0.99);

        let gr = BiphotonModel::new(PumpSpec::gauss_rect(1.0, 1.0).unwrap(), PhaseMatchSpec::new(4.0).unwrap()).unwrap();
        assert!(matches!(analytic_jta(&gr, &ax, &ax), Err(Error::Unsupported(_))));
    }

    #[test]
    fn plus_direction_tbp_is_gaussian_limit() {
        for a in [0.04, 0.0951, 0.5] {
            let m = BiphotonModel::gaussian(a, 4.0).unwrap();
            assert!((m.dtau_plus() * m.dnu_plus() - 2.0 * LN_2 / PI).abs() < 1e-12);
            assert!((m.dtau_minus() * m.dnu_minus() - 2.0 * SINC_SQ_HALF_MAX / PI).abs() < 1e-12);
        }
    }

    #[test]
    fn calibrate_examples() {
        let m = calibrate(2.7, 0.14).unwrap();
        assert!((m.a() - 0.0951).abs() < 5e-5);
        assert!((m.b() - 14.06).abs() < 5e-3);
        assert!((m.dnu_plus() - 2.7).abs() < 1e-12);
        assert!((m.dnu_minus() - 0.14).abs() < 1e-12);

        let m2 = calibrate(2.7, 0.28).unwrap();
        assert!((m.b() / m2.b() - 2.0).abs() < 1e-14);

        assert!(calibrate(0.0, 1.0).is_err());
        assert!(calibrate(1.0, -1.0).is_err());
    }

    #[test]
    fn bandwidth_conversion() {
        assert!((wavelength_bw_to_frequency_bw(792.0, 8.1) - 3.87).abs() < 5e-3);
        assert!((wavelength_bw_to_frequency_bw(792.0, 2.8) - 1.34).abs() < 5e-3);
        assert_eq!(wavelength_bw_to_frequency_bw(1584.0, 0.0), 0.0);
        assert!((wavelength_to_frequency(1584.0) - 189.26).abs() < 5e-3);
    }

    #[test]
    fn gaussian_from_bandwidth_sets_plus_width() {
        let p = PumpSpec::gaussian_from_bandwidth(792.0, 8.1).unwrap();
        let m = BiphotonModel::new(p, PhaseMatchSpec::new(14.06).unwrap()).unwrap();
        let expect = wavelength_bw_to_frequency_bw(792.0, 8.1) / SQRT_2;
        assert!((m.dnu_plus() - expect).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(PumpSpec::gaussian(0.0).is_err());
        assert!(PumpSpec::gauss_rect(1.0, 0.0).is_err());
        assert!(PhaseMatchSpec::new(-2.0).is_err());
        assert!(PumpSpec::gaussian_from_bandwidth(-1.0, 2.0).is_err());
        assert!(PumpSpec::gauss_rect_from_bandwidth(792.0, 2.8, 1.5).is_err());
    }
}
