//! Model → spectral amplitude → temporal amplitude → width report, on an
//! automatically sized grid.

use std::f64::consts::{LN_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_widths, InstrumentWidths, ResolutionPolicy, WidthAnalysis, WidthReport};
use crate::error::{Error, Result};
use crate::grid::{Axis, Field2D, Intensity2D, Unit};
use crate::model::{jsa, wavelength_to_frequency, BiphotonModel};
use crate::transform::{dft2_with_diagnostics, Direction};

pub const MIN_GRID_N: usize = 64;
pub const MAX_GRID_N: usize = 4096;

/// Degenerate signal/idler wavelength used when nothing else is given, nm.
pub const DEFAULT_CENTER_WAVELENGTH_NM: f64 = 1584.0;

/// Sampling of the compute grid and the windows kept for output and analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPlan {
    /// Samples per axis of the square compute grid.
    pub n: usize,
    /// Full frequency span of the compute grid, THz.
    pub span_thz: f64,
    /// Full width of the frequency window kept, THz.
    pub window_thz: f64,
    /// Full width of the time window kept, ps.
    pub window_ps: f64,
    /// Absolute frequency at the grid center, THz.
    pub center_thz: f64,
}

fn round_up(n: usize, multiple: usize) -> usize {
    n.div_ceil(multiple) * multiple
}

impl GridPlan {
    /// Grid that resolves both the narrow and the wide direction of the
    /// model in both domains.
    pub fn auto(model: &BiphotonModel) -> Self {
        let a = model.a();
        let b = model.b();
        let dnu_minus = model.dnu_minus();
        let dnu_plus = model.dnu_plus();
        let dtau_plus = 2.0 * LN_2 / (PI * dnu_plus);

        // Pump amplitude reaches 1e-12 at |ν₁+ν₂| = s.
        let s = (12.0 * std::f64::consts::LN_10 / a).sqrt();
        let half_pump = s + 0.5 * model.pump.rect_full_width;
        let span_thz = (6.0 / dtau_plus).max(2.0 * half_pump);
        let n = ((span_thz / (dnu_minus / 8.0)).ceil() as usize).max(512);
        let n = round_up(n, 64).min(MAX_GRID_N);

        // Intensity falls to 1e-6 along ν₊ at this rotated coordinate.
        let nu_plus_edge = (6.0 * std::f64::consts::LN_10 / (4.0 * a)).sqrt() + model.pump.rect_full_width / SQRT_2;
        let window_thz = 2.0 * (1.2 * nu_plus_edge / SQRT_2).max(10.0 * dnu_minus);
        let window_ps = 2.0 * 1.3 * (b / (2.0 * PI) + 3.0 * dtau_plus);

        GridPlan {
            n,
            span_thz,
            window_thz: window_thz.min(span_thz),
            window_ps: window_ps.min(n as f64 / span_thz),
            center_thz: wavelength_to_frequency(DEFAULT_CENTER_WAVELENGTH_NM),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_GRID_N..=MAX_GRID_N).contains(&self.n) {
            return Err(Error::OutOfRange {
                what: "grid n",
                value: self.n as f64,
                min: MIN_GRID_N as f64,
                max: MAX_GRID_N as f64,
            });
        }
        for (what, v) in [
            ("span_thz", self.span_thz),
            ("window_thz", self.window_thz),
            ("window_ps", self.window_ps),
            ("center_thz", self.center_thz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{what} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn step_thz(&self) -> f64 {
        self.span_thz / self.n as f64
    }

    pub fn step_ps(&self) -> f64 {
        1.0 / self.span_thz
    }

    /// Logs when the grid is too coarse for the narrow spectral direction.
    pub fn check_resolution(&self, model: &BiphotonModel) {
        if self.step_thz() > model.dnu_minus() / 8.0 {
            log::warn!(
                "frequency step {:.4} THz is coarse against dnu_minus {:.4} THz; widths may be biased",
                self.step_thz(),
                model.dnu_minus()
            );
        }
    }
}

/// Fields and widths computed from one model.
#[derive(Debug, Clone)]
pub struct ModelRun {
    pub model: BiphotonModel,
    pub plan: GridPlan,
    /// Spectral amplitude on the full compute grid.
    pub jsa_full: Field2D,
    /// Temporal amplitude on the full conjugate grid.
    pub jta_full: Field2D,
    /// Peak-normalized intensities on the full grids.
    pub tsi_full: Intensity2D,
    pub tti_full: Intensity2D,
    /// Peak-normalized intensities inside the output windows.
    pub tsi: Intensity2D,
    pub tti: Intensity2D,
    pub analysis: WidthAnalysis,
}

impl ModelRun {
    pub fn report(&self) -> &WidthReport {
        &self.analysis.report
    }

    /// Peak-normalized magnitudes inside the output windows.
    pub fn jsa_window(&self) -> Result<Intensity2D> {
        self.jsa_full
            .magnitude()
            .peak_normalized()
            .crop_symmetric(0.5 * self.plan.window_thz, 0.5 * self.plan.window_thz)
    }

    pub fn jta_window(&self) -> Result<Intensity2D> {
        self.jta_full
            .magnitude()
            .peak_normalized()
            .crop_symmetric(0.5 * self.plan.window_ps, 0.5 * self.plan.window_ps)
    }
}

/// Builds the spectral amplitude, transforms it and extracts all widths.
pub fn run_model(model: &BiphotonModel, plan: &GridPlan) -> Result<ModelRun> {
    plan.validate()?;
    plan.check_resolution(model);
    // The span is n·step, so the conjugate grid spans 1/step.
    let axis = Axis::new(plan.center_thz, plan.step_thz(), plan.n, Unit::THz)?;
    let jsa_full = jsa(model, &axis, &axis)?;
    let (jta_full, warning) = dft2_with_diagnostics(&jsa_full, Direction::FreqToTime)?;
    if let Some(w) = warning {
        log::debug!("spectral amplitude edge ratio {:.2e} on the compute grid", w.edge_ratio);
    }
    let tsi_full = jsa_full.intensity().peak_normalized();
    let tti_full = jta_full.intensity().peak_normalized();
    let tsi = tsi_full.crop_symmetric(0.5 * plan.window_thz, 0.5 * plan.window_thz)?;
    let tti = tti_full.crop_symmetric(0.5 * plan.window_ps, 0.5 * plan.window_ps)?;
    let analysis = analyze_widths(&tsi, &tti, &InstrumentWidths::none(), ResolutionPolicy::Strict)?;
    Ok(ModelRun {
        model: *model,
        plan: *plan,
        jsa_full,
        jta_full,
        tsi_full,
        tti_full,
        tsi,
        tti,
        analysis,
    })
}

/// Width report of a model on its automatic grid.
pub fn model_report(model: &BiphotonModel) -> Result<WidthReport> {
    Ok(*run_model(model, &GridPlan::auto(model))?.report())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::calibrate;

    #[test]
    fn auto_plan_is_valid_for_table_rows() {
        for (p, m) in [(1.2, 0.13), (2.7, 0.14), (2.3, 0.33)] {
            let model = calibrate(p, m).unwrap();
            let plan = GridPlan::auto(&model);
            plan.validate().unwrap();
            assert!(plan.step_thz() <= m / 8.0 * 1.0001 || plan.n == MAX_GRID_N);
            assert!(plan.window_ps < plan.n as f64 * plan.step_ps());
        }
    }

    #[test]
    fn plan_rejects_bad_n() {
        let mut plan = GridPlan::auto(&calibrate(2.7, 0.14).unwrap());
        plan.n = 32;
        assert!(matches!(plan.validate(), Err(Error::OutOfRange { .. })));
    }
}
