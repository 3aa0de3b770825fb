//! Run configuration in TOML (dotted keys and `#` comments allowed).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instrument::{SpectrometerConfig, UpconversionConfig};
use crate::model::{
    calibrate, BiphotonModel, PhaseMatchSpec, PumpShape, PumpSpec, SINC_SQ_HALF_MAX, SPEED_OF_LIGHT_NM_THZ,
};
use crate::pipeline::{GridPlan, MAX_GRID_N, MIN_GRID_N};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUTPUT: &str = "out";

/// Crystal length at which `dnu_minus` equals [`REFERENCE_DNU_MINUS_THZ`].
pub const REFERENCE_CRYSTAL_MM: f64 = 30.0;
pub const REFERENCE_DNU_MINUS_THZ: f64 = 0.14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PumpBlock {
    pub center_nm: f64,
    pub bandwidth_nm: f64,
    pub shape: PumpShape,
    /// Share of the total bandwidth carried by the rectangle (gauss_rect only).
    pub rect_fraction: f64,
}

impl Default for PumpBlock {
    fn default() -> Self {
        PumpBlock {
            center_nm: 792.0,
            bandwidth_nm: 8.1,
            shape: PumpShape::Gaussian,
            rect_fraction: 1.0 - crate::model::DEFAULT_GAUSS_RECT_GAUSSIAN_FRACTION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrystalBlock {
    pub label_mm: f64,
}

impl Default for CrystalBlock {
    fn default() -> Self {
        CrystalBlock {
            label_mm: REFERENCE_CRYSTAL_MM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationBlock {
    pub dnu_plus: f64,
    pub dnu_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridBlock {
    pub n: Option<usize>,
    /// Full compute span, THz.
    pub span_thz: Option<f64>,
    /// Full width of the frequency output window, THz.
    pub window_thz: Option<f64>,
    /// Full width of the time output window, ps.
    pub span_ps: Option<f64>,
}

/// Raw configuration as written in the file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub pump: Option<PumpBlock>,
    pub crystal: Option<CrystalBlock>,
    pub model: Option<ModelBlock>,
    pub calibration: Option<CalibrationBlock>,
    pub grid: GridBlock,
    pub spectrometer: SpectrometerConfig,
    pub upconversion: UpconversionConfig,
}

/// Validated configuration ready to run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedRun {
    pub model: BiphotonModel,
    pub plan: GridPlan,
    pub spectrometer: SpectrometerConfig,
    pub upconversion: UpconversionConfig,
    pub seed: u64,
    pub output: PathBuf,
}

fn key_error(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(key_error(key, format!("must be positive, got {v}")))
    }
}

/// Coefficient `b` for a crystal of the given length, scaled linearly from
/// the reference crystal.
pub fn phase_matching_for_length(length_mm: f64) -> f64 {
    std::f64::consts::SQRT_2 * SINC_SQ_HALF_MAX / REFERENCE_DNU_MINUS_THZ * (length_mm / REFERENCE_CRYSTAL_MM)
}

impl RunConfig {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1).unwrap_or(0);
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    fn build_model(&self) -> Result<BiphotonModel> {
        let routes = [
            self.model.is_some(),
            self.calibration.is_some(),
            self.pump.is_some() || self.crystal.is_some(),
        ];
        match routes.iter().filter(|&&r| r).count() {
            0 => {
                return Err(key_error(
                    "pump",
                    "no biphoton model: give a [model], a [calibration] or a [pump] block",
                ))
            }
            1 => {}
            _ => {
                return Err(key_error(
                    "model",
                    "[model], [calibration] and [pump]/[crystal] are mutually exclusive",
                ))
            }
        }
        if let Some(m) = self.model {
            positive("model.a", m.a)?;
            positive("model.b", m.b)?;
            return BiphotonModel::gaussian(m.a, m.b);
        }
        if let Some(c) = self.calibration {
            positive("calibration.dnu_plus", c.dnu_plus)?;
            positive("calibration.dnu_minus", c.dnu_minus)?;
            return calibrate(c.dnu_plus, c.dnu_minus);
        }
        let Some(pump) = self.pump else {
            return Err(key_error("pump", "a [crystal] block needs a [pump] block"));
        };
        positive("pump.center_nm", pump.center_nm)?;
        positive("pump.bandwidth_nm", pump.bandwidth_nm)?;
        let crystal = self.crystal.unwrap_or_default();
        positive("crystal.label_mm", crystal.label_mm)?;
        let spec = match pump.shape {
            PumpShape::Gaussian => PumpSpec::gaussian_from_bandwidth(pump.center_nm, pump.bandwidth_nm)?,
            PumpShape::GaussRect => {
                if !(pump.rect_fraction > 0.0 && pump.rect_fraction < 1.0) {
                    return Err(key_error(
                        "pump.rect_fraction",
                        format!("must lie in (0, 1), got {}", pump.rect_fraction),
                    ));
                }
                PumpSpec::gauss_rect_from_bandwidth(pump.center_nm, pump.bandwidth_nm, 1.0 - pump.rect_fraction)?
            }
        };
        let mut pm = PhaseMatchSpec::new(phase_matching_for_length(crystal.label_mm))?;
        pm.crystal_length_label = crystal.label_mm;
        BiphotonModel::new(spec, pm)
    }

    fn build_plan(&self, model: &BiphotonModel) -> Result<GridPlan> {
        let mut plan = GridPlan::auto(model);
        if let Some(pump) = self.pump {
            // Degenerate down-conversion sits at twice the pump wavelength.
            plan.center_thz = SPEED_OF_LIGHT_NM_THZ / (2.0 * pump.center_nm);
        }
        let g = self.grid;
        if let Some(n) = g.n {
            if !(MIN_GRID_N..=MAX_GRID_N).contains(&n) {
                return Err(key_error("grid.n", format!("must lie in [{MIN_GRID_N}, {MAX_GRID_N}], got {n}")));
            }
            plan.n = n;
        }
        if let Some(s) = g.span_thz {
            plan.span_thz = positive("grid.span_thz", s)?;
        }
        if let Some(w) = g.window_thz {
            plan.window_thz = positive("grid.window_thz", w)?;
        }
        if let Some(w) = g.span_ps {
            plan.window_ps = positive("grid.span_ps", w)?;
        }
        if g.window_thz.is_none() {
            plan.window_thz = plan.window_thz.min(plan.span_thz);
        }
        if g.span_ps.is_none() {
            plan.window_ps = plan.window_ps.min(plan.n as f64 * plan.step_ps());
        }
        if plan.window_thz > plan.span_thz {
            return Err(key_error(
                "grid.window_thz",
                format!("exceeds the compute span {} THz", plan.span_thz),
            ));
        }
        let time_span = plan.n as f64 * plan.step_ps();
        if plan.window_ps > time_span {
            return Err(key_error(
                "grid.span_ps",
                format!("exceeds the conjugate time span {time_span} ps"),
            ));
        }
        Ok(plan)
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let model = self.build_model()?;
        let plan = self.build_plan(&model)?;
        self.spectrometer.validate().map_err(|e| key_error("spectrometer", e.to_string()))?;
        self.upconversion.validate().map_err(|e| key_error("upconversion", e.to_string()))?;
        Ok(ResolvedRun {
            model,
            plan,
            spectrometer: self.spectrometer,
            upconversion: self.upconversion,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            output: self.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT)),
        })
    }
}
