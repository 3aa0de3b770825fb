//! Width extraction and time-bandwidth products.
//!
//! Frequency-domain widths along the lab axes and along `+` come from
//! Gaussian fits; the `-` widths (a sinc² spectrum and its rectangular
//! temporal partner) and the temporal marginal come from the numeric
//! half-maximum crossing.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cross_section, diagonal_projection, make_centered_axis, marginal, Axis, AxisId, Curve, Intensity2D, Rotated, Unit};

const FOUR_LN_2: f64 = 4.0 * LN_2;
const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-10;

/// Gaussian fits inside width extraction only see the curve within this
/// many numeric FWHMs of the peak.
pub const FIT_WINDOW_FWHMS: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub rms_residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[inline]
fn gaussian_model(p: &[f64; 4], x: f64) -> f64 {
    let d = x - p[0];
    p[3] + p[2] * (-FOUR_LN_2 * d * d / (p[1] * p[1])).exp()
}

fn chi2(p: &[f64; 4], xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(&x, &y)| (y - gaussian_model(p, x)).powi(2)).sum()
}

/// Solves a 4×4 system in place by Gaussian elimination with partial pivoting.
fn solve4(mut m: [[f64; 4]; 4], mut rhs: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Least-squares fit of `offset + amplitude·exp(-4ln2 (x-center)²/fwhm²)`
/// by damped Gauss-Newton (Levenberg-Marquardt).
pub fn fit_gaussian(curve: &Curve) -> Result<FitResult> {
    let n = curve.len();
    if n < 5 {
        return Err(Error::invalid(format!("Gaussian fit needs at least 5 samples, got {n}")));
    }
    let (lo, hi) = (curve.min(), curve.max());
    if hi - lo <= f64::EPSILON * hi.abs().max(1e-300) {
        return Err(Error::invalid("cannot fit a Gaussian to a constant curve"));
    }
    let axis = curve.axis();
    // Work in offsets from the axis center for conditioning.
    let xs = axis.offsets();
    let ys = curve.values();
    let step = axis.step();

    let fwhm0 = fwhm_numeric(curve, Baseline::Minimum).unwrap_or(0.25 * axis.span()).max(step);
    let mut p = [axis.offset(curve.argmax()), fwhm0, hi - lo, lo];
    let scale = [step, step, hi - lo, hi - lo];

    let mut lambda = 1e-3;
    let mut current = chi2(&p, &xs, ys);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (&x, &y) in xs.iter().zip(ys) {
            let d = x - p[0];
            let w2 = p[1] * p[1];
            let e = (-FOUR_LN_2 * d * d / w2).exp();
            let g = [
                p[2] * e * 2.0 * FOUR_LN_2 * d / w2,
                p[2] * e * 2.0 * FOUR_LN_2 * d * d / (w2 * p[1]),
                e,
                1.0,
            ];
            let r = y - (p[3] + p[2] * e);
            for i in 0..4 {
                jtr[i] += g[i] * r;
                for j in 0..4 {
                    jtj[i][j] += g[i] * g[j];
                }
            }
        }

        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = jtj;
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-300);
            }
            if let Some(delta) = solve4(damped, jtr) {
                let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2], p[3] + delta[3]];
                let trial_chi2 = chi2(&trial, &xs, ys);
                if trial[1] != 0.0 && trial_chi2.is_finite() && trial_chi2 <= current {
                    let small = (0..4).all(|i| delta[i].abs() <= STEP_TOLERANCE * (trial[i].abs() + scale[i]));
                    p = trial;
                    current = trial_chi2;
                    lambda = (lambda * 0.1).max(1e-12);
                    improved = true;
                    converged = small;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            // No damping level lowers the residual: already at the minimum.
            converged = true;
        }
        if converged {
            break;
        }
    }

    let fwhm = p[1].abs();
    if fwhm < step {
        converged = false;
    }
    Ok(FitResult {
        center: p[0] + axis.center(),
        fwhm,
        amplitude: p[2],
        offset: p[3],
        rms_residual: (current / n as f64).sqrt(),
        converged,
        iterations,
    })
}

/// Fits only the part of `curve` within `half_window_fwhms` numeric FWHMs
/// of its peak, so the result does not depend on how far the data extend.
pub fn fit_gaussian_windowed(curve: &Curve, half_window_fwhms: f64) -> Result<FitResult> {
    let Ok(estimate) = fwhm_numeric(curve, Baseline::Minimum) else {
        return fit_gaussian(curve);
    };
    let axis = curve.axis();
    let half = (half_window_fwhms * estimate / axis.step()).ceil() as usize;
    let peak = curve.argmax();
    let lo = peak.saturating_sub(half);
    let hi = (peak + half).min(curve.len() - 1);
    if hi - lo + 1 < 5 || (lo == 0 && hi == curve.len() - 1) {
        return fit_gaussian(curve);
    }
    let center = 0.5 * (axis.coord(lo) + axis.coord(hi));
    let sub_axis = Axis::new(center, axis.step(), hi - lo + 1, axis.unit())?;
    fit_gaussian(&Curve::new(sub_axis, curve.values()[lo..=hi].to_vec())?)
}

/// Baseline handling for [`fwhm_numeric`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// Use the samples as given.
    None,
    /// Subtract the curve minimum first.
    Minimum,
}

/// Width between the linearly interpolated half-maximum crossings on either
/// side of the global peak.
pub fn fwhm_numeric(curve: &Curve, baseline: Baseline) -> Result<f64> {
    let floor = match baseline {
        Baseline::None => 0.0,
        Baseline::Minimum => curve.min(),
    };
    let v: Vec<f64> = curve.values().iter().map(|x| x - floor).collect();
    let peak = curve.argmax();
    let half = 0.5 * v[peak];
    if !(half > 0.0) {
        return Err(Error::DegenerateProfile("curve has no positive peak".into()));
    }
    let axis = curve.axis();
    let left = (0..peak)
        .rev()
        .find(|&i| v[i] <= half)
        .ok_or_else(|| Error::DegenerateProfile("no half-maximum crossing left of the peak".into()))?;
    let right = (peak + 1..v.len())
        .find(|&i| v[i] <= half)
        .ok_or_else(|| Error::DegenerateProfile("no half-maximum crossing right of the peak".into()))?;
    let x_left = axis.coord(left) + (half - v[left]) / (v[left + 1] - v[left]) * axis.step();
    let x_right = axis.coord(right) - (half - v[right]) / (v[right - 1] - v[right]) * axis.step();
    Ok(x_right - x_left)
}

/// Quadrature removal of a Gaussian instrument width.
pub fn deconvolve_width(measured_fwhm: f64, instrument_fwhm: f64) -> Result<f64> {
    if !(instrument_fwhm.is_finite() && instrument_fwhm >= 0.0) {
        return Err(Error::invalid(format!("instrument width must be non-negative, got {instrument_fwhm}")));
    }
    if !measured_fwhm.is_finite() || measured_fwhm <= instrument_fwhm {
        return Err(Error::NonDeconvolvable {
            measured: measured_fwhm,
            instrument: instrument_fwhm,
        });
    }
    Ok((measured_fwhm * measured_fwhm - instrument_fwhm * instrument_fwhm).sqrt())
}

/// The eight widths and three time-bandwidth products of one condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    pub dnu_y: f64,
    pub dnu_yc: f64,
    pub dnu_plus: f64,
    pub dnu_minus: f64,
    pub dtau_y: f64,
    pub dtau_yc: f64,
    pub dtau_plus: f64,
    pub dtau_minus: f64,
    pub tbp_plus: f64,
    pub tbp_minus: f64,
    pub tbp_y: f64,
}

impl WidthReport {
    pub const WIDTH_NAMES: [&'static str; 8] = [
        "dnu_y",
        "dnu_yc",
        "dnu_plus",
        "dnu_minus",
        "dtau_y",
        "dtau_yc",
        "dtau_plus",
        "dtau_minus",
    ];

    /// Builds a report from widths; the products are computed here.
    #[allow(clippy::too_many_arguments)]
    pub fn from_widths(
        dnu_y: f64,
        dnu_yc: f64,
        dnu_plus: f64,
        dnu_minus: f64,
        dtau_y: f64,
        dtau_yc: f64,
        dtau_plus: f64,
        dtau_minus: f64,
    ) -> Result<Self> {
        let r = WidthReport {
            dnu_y,
            dnu_yc,
            dnu_plus,
            dnu_minus,
            dtau_y,
            dtau_yc,
            dtau_plus,
            dtau_minus,
            tbp_plus: dtau_plus * dnu_plus,
            tbp_minus: dtau_minus * dnu_minus,
            tbp_y: dtau_y * dnu_y,
        };
        for (name, w) in Self::WIDTH_NAMES.iter().zip(r.widths()) {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid(format!("width {name} must be positive, got {w}")));
            }
        }
        Ok(r)
    }

    pub fn widths(&self) -> [f64; 8] {
        [
            self.dnu_y,
            self.dnu_yc,
            self.dnu_plus,
            self.dnu_minus,
            self.dtau_y,
            self.dtau_yc,
            self.dtau_plus,
            self.dtau_minus,
        ]
    }

    pub fn tbps(&self) -> [f64; 3] {
        [self.tbp_plus, self.tbp_minus, self.tbp_y]
    }
}

/// Gaussian instrument FWHM per lab axis, for each domain.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InstrumentWidths {
    /// THz, axes 1 and 2 of the spectral map.
    pub frequency: [f64; 2],
    /// ps, axes 1 and 2 of the temporal map.
    pub time: [f64; 2],
}

impl InstrumentWidths {
    pub fn none() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Frequency,
    Time,
}

/// What to do when a measured width does not exceed the instrument width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolutionPolicy {
    /// Fail with [`Error::NonDeconvolvable`].
    Strict,
    /// Keep the measured width and record the quantity name.
    Flag,
}

/// Curves a width was read from, for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedCurve {
    pub name: &'static str,
    pub curve: Curve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthAnalysis {
    pub report: WidthReport,
    /// Widths before deconvolution.
    pub measured: [f64; 8],
    /// Effective instrument width applied to each quantity.
    pub instrument: [f64; 8],
    pub resolution_limited: Vec<&'static str>,
    pub curves: Vec<NamedCurve>,
}

/// Slice width through a field separable in rotated coordinates with the
/// given `+`/`-` widths: Gaussian×Gaussian in frequency, Gaussian×rect in time.
fn slice_width(domain: Domain, w_plus: f64, w_minus: f64) -> f64 {
    match domain {
        Domain::Frequency => (2.0 * w_plus * w_plus * w_minus * w_minus / (w_plus * w_plus + w_minus * w_minus)).sqrt(),
        Domain::Time => SQRT_2 * w_plus.min(w_minus),
    }
}

struct DomainWidths {
    measured: [f64; 4],
    instrument: [f64; 4],
    deconvolved: [f64; 4],
    limited: Vec<&'static str>,
    curves: Vec<NamedCurve>,
}

fn analyze_domain(
    field: &Intensity2D,
    domain: Domain,
    inst: [f64; 2],
    names: [&'static str; 4],
    policy: ResolutionPolicy,
) -> Result<DomainWidths> {
    let field = field.peak_normalized();
    let zero = field.axis_2().center();

    let m_y = marginal(&field, AxisId::First);
    let c_y = cross_section(&field, AxisId::First, zero)?;
    let p_plus = diagonal_projection(&field, Rotated::Plus)?;
    let p_minus = diagonal_projection(&field, Rotated::Minus)?;

    let w_y = match domain {
        Domain::Frequency => fit_width(&m_y)?,
        Domain::Time => fwhm_numeric(&m_y, Baseline::Minimum)?,
    };
    let w_yc = fit_width(&c_y)?;
    let w_plus = fit_width(&p_plus)?;
    let w_minus = fwhm_numeric(&p_minus, Baseline::Minimum)?;

    let mut limited = Vec::new();
    let mut deconv = |name: &'static str, measured: f64, instrument: f64| -> Result<f64> {
        match deconvolve_width(measured, instrument) {
            Ok(w) => Ok(w),
            Err(Error::NonDeconvolvable { .. }) if policy == ResolutionPolicy::Flag => {
                limited.push(name);
                Ok(measured)
            }
            Err(e) => Err(e),
        }
    };

    // A Gaussian blur, projected on a 45° direction, has the rms of the
    // per-axis widths.
    let r_rot = ((inst[0] * inst[0] + inst[1] * inst[1]) * 0.5).sqrt();
    let d_y = deconv(names[0], w_y, inst[0])?;
    let d_plus = deconv(names[2], w_plus, r_rot)?;
    let d_minus = deconv(names[3], w_minus, r_rot)?;
    // For a correlated field the blur broadens a slice through both rotated
    // factors; the effective width follows from the rotated widths before
    // and after deconvolution.
    let r_slice = if r_rot > 0.0 {
        let before = slice_width(domain, w_plus, w_minus);
        let after = slice_width(domain, d_plus, d_minus);
        (before * before - after * after).max(0.0).sqrt()
    } else {
        0.0
    };
    let d_yc = deconv(names[1], w_yc, r_slice)?;

    Ok(DomainWidths {
        measured: [w_y, w_yc, w_plus, w_minus],
        instrument: [inst[0], r_slice, r_rot, r_rot],
        deconvolved: [d_y, d_yc, d_plus, d_minus],
        limited,
        curves: vec![
            NamedCurve { name: names[0], curve: m_y },
            NamedCurve { name: names[1], curve: c_y },
            NamedCurve { name: names[2], curve: p_plus },
            NamedCurve { name: names[3], curve: p_minus },
        ],
    })
}

fn fit_width(curve: &Curve) -> Result<f64> {
    Ok(fit_gaussian_windowed(curve, FIT_WINDOW_FWHMS)?.fwhm)
}

/// Full width analysis of a spectral and a temporal intensity map.
pub fn analyze_widths(
    tsi: &Intensity2D,
    tti: &Intensity2D,
    instrument: &InstrumentWidths,
    policy: ResolutionPolicy,
) -> Result<WidthAnalysis> {
    if tsi.axis_1().unit() != Unit::THz || tsi.axis_2().unit() != Unit::THz {
        return Err(Error::invalid("spectral intensity must be on THz axes"));
    }
    if tti.axis_1().unit() != Unit::Ps || tti.axis_2().unit() != Unit::Ps {
        return Err(Error::invalid("temporal intensity must be on ps axes"));
    }
    let (freq, time) = rayon::join(
        || {
            analyze_domain(
                tsi,
                Domain::Frequency,
                instrument.frequency,
                ["dnu_y", "dnu_yc", "dnu_plus", "dnu_minus"],
                policy,
            )
        },
        || {
            analyze_domain(
                tti,
                Domain::Time,
                instrument.time,
                ["dtau_y", "dtau_yc", "dtau_plus", "dtau_minus"],
                policy,
            )
        },
    );
    let (freq, time) = (freq?, time?);
    let [dnu_y, dnu_yc, dnu_plus, dnu_minus] = freq.deconvolved;
    let [dtau_y, dtau_yc, dtau_plus, dtau_minus] = time.deconvolved;
    let report = WidthReport::from_widths(dnu_y, dnu_yc, dnu_plus, dnu_minus, dtau_y, dtau_yc, dtau_plus, dtau_minus)?;
    let mut measured = [0.0; 8];
    measured[..4].copy_from_slice(&freq.measured);
    measured[4..].copy_from_slice(&time.measured);
    let mut inst = [0.0; 8];
    inst[..4].copy_from_slice(&freq.instrument);
    inst[4..].copy_from_slice(&time.instrument);
    let mut resolution_limited = freq.limited;
    resolution_limited.extend(time.limited);
    let mut curves = freq.curves;
    curves.extend(time.curves);
    Ok(WidthAnalysis {
        report,
        measured,
        instrument: inst,
        resolution_limited,
        curves,
    })
}

/// Width report with strict deconvolution.
pub fn widths_report(tsi: &Intensity2D, tti: &Intensity2D, instrument: &InstrumentWidths) -> Result<WidthReport> {
    Ok(analyze_widths(tsi, tti, instrument, ResolutionPolicy::Strict)?.report)
}

/// Pearson correlation between the two lab coordinates, with the intensity
/// as probability mass.
pub fn correlation_sign(intensity: &Intensity2D) -> Result<f64> {
    if intensity.values().iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("intensity must be non-negative"));
    }
    let (n1, _) = intensity.dims();
    let o1 = intensity.axis_1().offsets();
    let o2 = intensity.axis_2().offsets();
    let (mut w, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for k1 in 0..n1 {
        for (k2, &v) in intensity.row(k1).iter().enumerate() {
            w += v;
            s1 += v * o1[k1];
            s2 += v * o2[k2];
        }
    }
    if !(w > 0.0) {
        return Err(Error::invalid("intensity has zero total mass"));
    }
    let (m1, m2) = (s1 / w, s2 / w);
    let (mut c11, mut c22, mut c12) = (0.0, 0.0, 0.0);
    for k1 in 0..n1 {
        let d1 = o1[k1] - m1;
        for (k2, &v) in intensity.row(k1).iter().enumerate() {
            let d2 = o2[k2] - m2;
            c11 += v * d1 * d1;
            c22 += v * d2 * d2;
            c12 += v * d1 * d2;
        }
    }
    if c11 <= 0.0 || c22 <= 0.0 {
        return Ok(0.0);
    }
    Ok((c12 / (c11 * c22).sqrt()).clamp(-1.0, 1.0))
}

/// Square grid sized to hold a reproduction with the given rotated widths.
pub fn reproduction_axis(w_plus: f64, w_minus: f64, unit: Unit) -> Result<Axis> {
    let half = 1.5 * w_plus.max(w_minus);
    let step = w_plus.min(w_minus) / 12.0;
    let n = ((2.0 * half / step).ceil() as usize + 1).clamp(65, 2049) | 1;
    make_centered_axis(0.0, 2.0 * half, n, unit)
}

/// Smooth intensity built from reported widths: a Gaussian along `+`, and
/// along `-` a Gaussian (frequency) or a rectangle (time).
pub fn reproduce_field(widths: &WidthReport, domain: Domain) -> Result<Intensity2D> {
    let (w_plus, w_minus, unit) = match domain {
        Domain::Frequency => (widths.dnu_plus, widths.dnu_minus, Unit::THz),
        Domain::Time => (widths.dtau_plus, widths.dtau_minus, Unit::Ps),
    };
    let axis = reproduction_axis(w_plus, w_minus, unit)?;
    reproduce_field_on(widths, domain, &axis)
}

/// As [`reproduce_field`], on a caller-chosen square grid.
pub fn reproduce_field_on(widths: &WidthReport, domain: Domain, axis: &Axis) -> Result<Intensity2D> {
    let (w_plus, w_minus) = match domain {
        Domain::Frequency => (widths.dnu_plus, widths.dnu_minus),
        Domain::Time => (widths.dtau_plus, widths.dtau_minus),
    };
    let c1 = axis.center();
    Intensity2D::from_fn(*axis, *axis, |x, y| {
        let (x, y) = (x - c1, y - c1);
        let plus = (x + y) * FRAC_1_SQRT_2;
        let minus = (x - y) * FRAC_1_SQRT_2;
        let along_plus = (-FOUR_LN_2 * plus * plus / (w_plus * w_plus)).exp();
        let along_minus = match domain {
            Domain::Frequency => (-FOUR_LN_2 * minus * minus / (w_minus * w_minus)).exp(),
            Domain::Time => {
                if minus.abs() <= 0.5 * w_minus {
                    1.0
                } else {
                    0.0
                }
            }
        };
        along_plus * along_minus
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn gaussian_curve(n: usize, span: f64, center: f64, fwhm: f64, amp: f64, offset: f64) -> Curve {
        let ax = make_centered_axis(0.0, span, n, Unit::THz).unwrap();
        Curve::from_fn(ax, |x| offset + amp * (-FOUR_LN_2 * (x - center).powi(2) / (fwhm * fwhm)).exp()).unwrap()
    }

    #[test]
    fn fit_recovers_exact_gaussian() {
        let c = gaussian_curve(101, 10.0, 0.5, 2.0, 3.0, 0.1);
        let fit = fit_gaussian(&c).unwrap();
        assert!(fit.converged);
        assert!((fit.fwhm - 2.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.center - 0.5).abs() < 1e-6);
        assert!((fit.amplitude - 3.0).abs() < 1e-6);
        assert!((fit.offset - 0.1).abs() < 1e-6);
        assert!(fit.rms_residual < 1e-9);
    }

    #[test]
    fn fit_with_noise_is_within_three_percent() {
        let mut rng = rand_pcg::Pcg64::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let clean = gaussian_curve(100, 10.0, 0.0, 2.0, 1.0, 0.0);
        let noisy: Vec<f64> = clean.values().iter().map(|v| v * (1.0 + noise.sample(&mut rng))).collect();
        let fit = fit_gaussian(&Curve::new(*clean.axis(), noisy).unwrap()).unwrap();
        assert!(fit.converged);
        assert!((fit.fwhm / 2.0 - 1.0).abs() < 0.03, "{fit:?}");
    }

    #[test]
    fn fit_rejects_short_or_constant() {
        let ax = make_centered_axis(0.0, 1.0, 4, Unit::THz).unwrap();
        assert!(matches!(fit_gaussian(&Curve::new(ax, vec![0.0, 1.0, 0.5, 0.0]).unwrap()), Err(Error::InvalidArgument(_))));
        let ax = make_centered_axis(0.0, 1.0, 9, Unit::THz).unwrap();
        assert!(matches!(fit_gaussian(&Curve::new(ax, vec![2.0; 9]).unwrap()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fit_flags_collapse_below_one_step() {
        // Single-sample spike on a coarse grid.
        let ax = make_centered_axis(0.0, 10.0, 11, Unit::THz).unwrap();
        let mut v = vec![0.0; 11];
        v[5] = 1.0;
        let fit = fit_gaussian(&Curve::new(ax, v).unwrap()).unwrap();
        assert!(!fit.converged || fit.fwhm >= ax.step());
    }

    #[test]
    fn numeric_fwhm_of_rect_and_gaussian() {
        let ax = make_centered_axis(0.0, 10.0, 2001, Unit::Ps).unwrap();
        let rect = Curve::from_fn(ax, |x| if x.abs() <= 1.7 { 1.0 } else { 0.0 }).unwrap();
        assert!((fwhm_numeric(&rect, Baseline::None).unwrap() - 3.4).abs() <= 1.01 * ax.step());
        let g = gaussian_curve(201, 10.0, 0.0, 2.0, 1.0, 0.0);
        assert!((fwhm_numeric(&g, Baseline::None).unwrap() / 2.0 - 1.0).abs() < 0.01);
        let offset = gaussian_curve(201, 10.0, 0.0, 2.0, 1.0, 5.0);
        assert!((fwhm_numeric(&offset, Baseline::Minimum).unwrap() / 2.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn numeric_fwhm_degenerate() {
        let ax = make_centered_axis(0.0, 4.0, 9, Unit::Ps).unwrap();
        let edge = Curve::from_fn(ax, |x| 3.0 - x).unwrap();
        assert!(matches!(fwhm_numeric(&edge, Baseline::None), Err(Error::DegenerateProfile(_))));
        let flat = Curve::new(ax, vec![0.0; 9]).unwrap();
        assert!(matches!(fwhm_numeric(&flat, Baseline::None), Err(Error::DegenerateProfile(_))));
    }

    #[test]
    fn deconvolution_examples() {
        assert_eq!(deconvolve_width(1.3, 0.0).unwrap(), 1.3);
        let bpf = crate::model::wavelength_bw_to_frequency_bw(1584.0, 0.56);
        assert!((bpf - 0.0669).abs() < 1e-4);
        assert!((deconvolve_width(0.82, bpf).unwrap() - 0.817).abs() < 1e-3);
        assert!(matches!(deconvolve_width(0.3, 0.48), Err(Error::NonDeconvolvable { .. })));
        assert!(deconvolve_width(1.0, -0.1).is_err());
    }

    #[test]
    fn report_products_are_exact() {
        let r = WidthReport::from_widths(1.9, 0.21, 2.7, 0.14, 4.3, 0.26, 0.18, 6.1).unwrap();
        assert_eq!(r.tbp_plus, 0.18 * 2.7);
        assert_eq!(r.tbp_minus, 6.1 * 0.14);
        assert_eq!(r.tbp_y, 4.3 * 1.9);
        assert!(WidthReport::from_widths(1.9, 0.0, 2.7, 0.14, 4.3, 0.26, 0.18, 6.1).is_err());
    }

    #[test]
    fn correlation_examples() {
        let ax = make_centered_axis(0.0, 4.0, 41, Unit::THz).unwrap();
        let ridge = Intensity2D::from_fn(ax, ax, |x, y| if (x - y).abs() < 1e-9 { 1.0 } else { 0.0 }).unwrap();
        assert!((correlation_sign(&ridge).unwrap() - 1.0).abs() < 1e-12);
        let anti = Intensity2D::from_fn(ax, ax, |x, y| if (x + y).abs() < 1e-9 { 1.0 } else { 0.0 }).unwrap();
        assert!((correlation_sign(&anti).unwrap() + 1.0).abs() < 1e-12);
        let sep = Intensity2D::from_fn(ax, ax, |x, y| (-(x - 0.3).powi(2)).exp() * (1.0 + y * y)).unwrap();
        assert!(correlation_sign(&sep).unwrap().abs() < 1e-9);
        let zero = Intensity2D::from_fn(ax, ax, |_, _| 0.0).unwrap();
        assert!(matches!(correlation_sign(&zero), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn uncorrelated_gaussian_has_equal_marginal_and_slice() {
        let ax = make_centered_axis(0.0, 8.0, 321, Unit::THz).unwrap();
        let tsi = Intensity2D::from_fn(ax, ax, |x, y| (-FOUR_LN_2 * (x * x + y * y) / 1.44).exp()).unwrap();
        let tx = make_centered_axis(0.0, 8.0, 321, Unit::Ps).unwrap();
        let tti = Intensity2D::from_fn(tx, tx, |x, y| (-FOUR_LN_2 * (x * x + y * y)).exp()).unwrap();
        let r = widths_report(&tsi, &tti, &InstrumentWidths::none()).unwrap();
        assert!((r.dnu_y / r.dnu_yc - 1.0).abs() < 0.02, "{r:?}");
    }

    #[test]
    fn reproduction_round_trip_and_fixed_point() {
        let target = WidthReport::from_widths(1.9, 0.21, 2.7, 0.14, 4.3, 0.26, 0.18, 6.1).unwrap();
        let tsi = reproduce_field(&target, Domain::Frequency).unwrap();
        let tti = reproduce_field(&target, Domain::Time).unwrap();
        let r0 = widths_report(&tsi, &tti, &InstrumentWidths::none()).unwrap();
        for (got, want) in [
            (r0.dnu_plus, 2.7),
            (r0.dnu_minus, 0.14),
            (r0.dtau_plus, 0.18),
            (r0.dtau_minus, 6.1),
        ] {
            assert!((got / want - 1.0).abs() < 0.03, "{got} vs {want}");
        }
        let r1 = widths_report(
            &reproduce_field(&r0, Domain::Frequency).unwrap(),
            &reproduce_field(&r0, Domain::Time).unwrap(),
            &InstrumentWidths::none(),
        )
        .unwrap();
        for (a, b) in r0.widths().iter().zip(r1.widths()) {
            assert!((a / b - 1.0).abs() < 0.03, "{r0:?}\n{r1:?}");
        }
        // Marginals of the reproduced case match the measured row.
        assert!((r0.dnu_y / 1.9 - 1.0).abs() < 0.05);
        assert!((r0.dtau_y / 4.3 - 1.0).abs() < 0.05);
        assert!(correlation_sign(&tsi).unwrap() > 0.5);
        assert!(correlation_sign(&tti).unwrap() < -0.5);
    }

    #[test]
    fn uncorrelated_reproduction_has_zero_correlation() {
        let w = WidthReport::from_widths(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let f = reproduce_field(&w, Domain::Frequency).unwrap();
        assert!(correlation_sign(&f).unwrap().abs() < 1e-9);
    }

    #[test]
    fn windowed_fit_ignores_far_baseline() {
        let ax = make_centered_axis(0.0, 40.0, 801, Unit::THz).unwrap();
        let c = Curve::from_fn(ax, |x| (-FOUR_LN_2 * x * x / 4.0).exp() + if x.abs() > 8.0 { 0.3 } else { 0.0 }).unwrap();
        let fit = fit_gaussian_windowed(&c, FIT_WINDOW_FWHMS).unwrap();
        assert!((fit.fwhm - 2.0).abs() < 1e-6);
    }
}
