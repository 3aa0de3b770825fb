//! The four commands behind the command-line tool.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{analyze_widths, correlation_sign, InstrumentWidths, ResolutionPolicy, WidthAnalysis, WidthReport};
use crate::config::ResolvedRun;
use crate::error::{Error, Result};
use crate::grid::{Intensity2D, Unit};
use crate::instrument::{nm_scan_to_frequency, simulate_tsi_scan, simulate_tti_scan, ScanResult};
use crate::io::{read_heatmap, round_sig6, write_curves, write_heatmap, write_json, write_report, HeatmapMeta};
use crate::model::calibrate;
use crate::pipeline::{model_report, run_model};
use crate::reference::{Condition, REFERENCE};

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

#[derive(Debug, Clone)]
pub struct ModelOutput {
    pub report: WidthReport,
    pub files: Vec<PathBuf>,
}

/// Writes peak-normalized maps of the model and its width report.
pub fn cmd_model(run: &ResolvedRun, out: &Path) -> Result<ModelOutput> {
    ensure_dir(out)?;
    let result = run_model(&run.model, &run.plan)?;
    let maps = [
        ("jsa.csv", "jsa", "magnitude", result.jsa_window()?),
        ("tsi.csv", "tsi", "intensity", result.tsi.clone()),
        ("jta.csv", "jta", "magnitude", result.jta_window()?),
        ("tti.csv", "tti", "intensity", result.tti.clone()),
    ];
    let mut files = Vec::new();
    for (name, quantity, kind, field) in &maps {
        let path = out.join(name);
        let meta = HeatmapMeta::new()
            .with("quantity", quantity)
            .with("value", kind)
            .with("normalization", "peak");
        write_heatmap(&path, field, &meta)?;
        files.push(path);
    }
    let path = out.join("report.json");
    write_report(&path, result.report())?;
    files.push(path);
    let path = out.join("model.json");
    write_json(
        &path,
        &serde_json::json!({ "model": run.model, "grid": run.plan }),
    )?;
    files.push(path);
    Ok(ModelOutput {
        report: *result.report(),
        files,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Tsi,
    Tti,
    Both,
}

impl Which {
    fn tsi(self) -> bool {
        matches!(self, Which::Tsi | Which::Both)
    }

    fn tti(self) -> bool {
        matches!(self, Which::Tti | Which::Both)
    }
}

/// Seed of the delay scan, kept apart from the spectrometer stream.
pub fn tti_seed(seed: u64) -> u64 {
    seed ^ 0x5851_F42D_4C95_7F2D
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub tsi: Option<ScanResult>,
    pub tti: Option<ScanResult>,
    pub files: Vec<PathBuf>,
}

fn scan_meta(scan: &ScanResult, quantity: &str) -> HeatmapMeta {
    HeatmapMeta::new()
        .with("quantity", quantity)
        .with("value", "counts")
        .with("normalization", "none")
        .with("instrument_fwhm", scan.instrument_fwhm())
        .with("floor", scan.floor())
        .with("seed", scan.seed)
}

fn counts_field(scan: &ScanResult) -> Result<Intensity2D> {
    Intensity2D::new(scan.axis_1, scan.axis_2, scan.counts.iter().map(|&c| c as f64).collect())
}

#[derive(Serialize)]
struct SimulateMeta<'a> {
    which: Which,
    seed: u64,
    tsi_seed: Option<u64>,
    tti_seed: Option<u64>,
    model: &'a crate::model::BiphotonModel,
    grid: &'a crate::pipeline::GridPlan,
    spectrometer: &'a crate::instrument::SpectrometerConfig,
    upconversion: &'a crate::instrument::UpconversionConfig,
}

/// Runs the virtual scans and writes count maps plus a metadata record.
pub fn cmd_simulate(run: &ResolvedRun, which: Which, out: &Path) -> Result<SimulateOutput> {
    ensure_dir(out)?;
    let result = run_model(&run.model, &run.plan)?;
    let mut files = Vec::new();
    let tsi = if which.tsi() {
        let scan = simulate_tsi_scan(&result.tsi_full, &run.spectrometer, run.seed)?;
        let path = out.join("scan_tsi.csv");
        write_heatmap(&path, &counts_field(&scan)?, &scan_meta(&scan, "scan_tsi"))?;
        files.push(path);
        Some(scan)
    } else {
        None
    };
    let tti = if which.tti() {
        let scan = simulate_tti_scan(&result.tti_full, &run.upconversion, tti_seed(run.seed))?;
        let path = out.join("scan_tti.csv");
        write_heatmap(&path, &counts_field(&scan)?, &scan_meta(&scan, "scan_tti"))?;
        files.push(path);
        Some(scan)
    } else {
        None
    };
    let path = out.join("meta.json");
    write_json(
        &path,
        &SimulateMeta {
            which,
            seed: run.seed,
            tsi_seed: tsi.as_ref().map(|s| s.seed),
            tti_seed: tti.as_ref().map(|s| s.seed),
            model: &run.model,
            grid: &run.plan,
            spectrometer: &run.spectrometer,
            upconversion: &run.upconversion,
        },
    )?;
    files.push(path);
    Ok(SimulateOutput { tsi, tti, files })
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeInputs {
    pub tsi: PathBuf,
    pub tti: PathBuf,
    /// Per-axis instrument FWHM, THz; taken from the file when absent.
    pub instrument_thz: Option<f64>,
    /// Per-axis instrument FWHM, ps; taken from the file when absent.
    pub instrument_ps: Option<f64>,
}

impl AnalyzeInputs {
    /// Picks `scan_tsi.csv`/`scan_tti.csv` or `tsi.csv`/`tti.csv` from a directory.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        for (a, b) in [("scan_tsi.csv", "scan_tti.csv"), ("tsi.csv", "tti.csv")] {
            let (tsi, tti) = (dir.join(a), dir.join(b));
            if tsi.exists() && tti.exists() {
                return Ok(AnalyzeInputs {
                    tsi,
                    tti,
                    ..Default::default()
                });
            }
        }
        Err(Error::invalid(format!(
            "{} holds neither scan_tsi.csv/scan_tti.csv nor tsi.csv/tti.csv",
            dir.display()
        )))
    }
}

/// Loads a map for analysis: removes the recorded floor and maps nm scans
/// onto frequency axes.
fn load_for_analysis(path: &Path, expected: Unit) -> Result<(Intensity2D, f64)> {
    let (field, meta) = read_heatmap(path)?;
    let floor = meta.get_f64("floor").unwrap_or(0.0);
    let field = if floor != 0.0 { field.map(|v| v - floor) } else { field };
    let field = if field.axis_1().unit() == Unit::Nm {
        nm_scan_to_frequency(&field)?
    } else {
        field
    };
    if field.axis_1().unit() != expected {
        return Err(Error::invalid(format!(
            "{}: expected {} axes, found {}",
            path.display(),
            expected,
            field.axis_1().unit()
        )));
    }
    Ok((field, meta.get_f64("instrument_fwhm").unwrap_or(0.0)))
}

#[derive(Serialize)]
struct AnalysisRecord {
    measured: BTreeMap<&'static str, f64>,
    instrument: BTreeMap<&'static str, f64>,
    resolution_limited: Vec<&'static str>,
    correlation_tsi: f64,
    correlation_tti: f64,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutput {
    pub analysis: WidthAnalysis,
    pub correlation_tsi: f64,
    pub correlation_tti: f64,
}

/// Width report, plotting curves and diagnostics for a pair of maps.
pub fn cmd_analyze(inputs: &AnalyzeInputs, out: &Path) -> Result<AnalyzeOutput> {
    ensure_dir(out)?;
    let (tsi, tsi_inst) = load_for_analysis(&inputs.tsi, Unit::THz)?;
    let (tti, tti_inst) = load_for_analysis(&inputs.tti, Unit::Ps)?;
    let r_thz = inputs.instrument_thz.unwrap_or(tsi_inst);
    let r_ps = inputs.instrument_ps.unwrap_or(tti_inst);
    let instrument = InstrumentWidths {
        frequency: [r_thz, r_thz],
        time: [r_ps, r_ps],
    };
    let analysis = analyze_widths(&tsi, &tti, &instrument, ResolutionPolicy::Flag)?;
    for name in &analysis.resolution_limited {
        log::warn!("{name} is resolution limited; reporting the measured width");
    }
    let clamp = |f: &Intensity2D| f.map(|v| v.max(0.0));
    let correlation_tsi = correlation_sign(&clamp(&tsi))?;
    let correlation_tti = correlation_sign(&clamp(&tti))?;

    write_report(&out.join("report.json"), &analysis.report)?;
    write_curves(&out.join("marginals.csv"), &analysis.curves)?;
    let names = WidthReport::WIDTH_NAMES;
    write_json(
        &out.join("analysis.json"),
        &AnalysisRecord {
            measured: names.iter().copied().zip(analysis.measured.map(round_sig6)).collect(),
            instrument: names.iter().copied().zip(analysis.instrument.map(round_sig6)).collect(),
            resolution_limited: analysis.resolution_limited.clone(),
            correlation_tsi: round_sig6(correlation_tsi),
            correlation_tti: round_sig6(correlation_tti),
        },
    )?;
    Ok(AnalyzeOutput {
        analysis,
        correlation_tsi,
        correlation_tti,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
    Above(f64),
}

impl Tolerance {
    pub fn accepts(self, value: f64, expected: f64) -> bool {
        match self {
            Tolerance::Absolute(t) => (value - expected).abs() <= t,
            Tolerance::Relative(t) => (value - expected).abs() <= t * expected.abs(),
            Tolerance::Above(limit) => value > limit,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Absolute(t) => write!(f, "±{t}"),
            Tolerance::Relative(t) => write!(f, "±{}%", t * 100.0),
            Tolerance::Above(l) => write!(f, "> {l}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub group: &'static str,
    pub condition: Condition,
    pub quantity: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutcome {
    pub checks: Vec<Check>,
}

impl VerifyOutcome {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<8} {:<4} {:<10} {:>10} {:>10} {:>10}  {}\n",
            "check", "cond", "quantity", "value", "expected", "tolerance", "result"
        );
        for c in &self.checks {
            s.push_str(&format!(
                "{:<8} {:<4} {:<10} {:>10.4} {:>10.4} {:>10}  {}\n",
                c.group,
                c.condition.label(),
                c.quantity,
                c.value,
                c.expected,
                c.tolerance.to_string(),
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        s
    }
}

/// Absolute tolerance between printed products and products of printed widths.
pub const PRODUCT_TOLERANCE: f64 = 0.05;
/// Model against printed `tbp_plus`.
pub const MODEL_TBP_PLUS_TOLERANCE: f64 = 0.05;
/// Model against printed `tbp_minus`; the sinc model sits at its limit 0.886.
pub const MODEL_TBP_MINUS_TOLERANCE: f64 = 0.15;
/// Model against printed `tbp_y`, relative.
pub const MODEL_TBP_Y_TOLERANCE: f64 = 0.5;

fn check(group: &'static str, condition: Condition, quantity: &'static str, value: f64, expected: f64, tolerance: Tolerance) -> Check {
    Check {
        group,
        condition,
        quantity,
        value,
        expected,
        tolerance,
        pass: tolerance.accepts(value, expected),
    }
}

/// Consistency of the reference tables, and the calibrated model against them.
pub fn cmd_verify() -> Result<VerifyOutcome> {
    let mut checks = Vec::new();
    for e in &REFERENCE {
        let p = e.widths.products();
        let tol = Tolerance::Absolute(PRODUCT_TOLERANCE);
        checks.push(check("product", e.condition, "tbp_plus", p.tbp_plus, e.products.tbp_plus, tol));
        checks.push(check("product", e.condition, "tbp_minus", p.tbp_minus, e.products.tbp_minus, tol));
        checks.push(check("product", e.condition, "tbp_y", p.tbp_y, e.products.tbp_y, tol));
    }
    for e in &REFERENCE {
        let model = calibrate(e.widths.dnu_plus, e.widths.dnu_minus)?;
        let r = model_report(&model)?;
        checks.push(check(
            "model",
            e.condition,
            "tbp_plus",
            r.tbp_plus,
            e.products.tbp_plus,
            Tolerance::Absolute(MODEL_TBP_PLUS_TOLERANCE),
        ));
        // Condition c sits below the sinc limit; no pure-model match exists.
        if e.condition != Condition::C {
            checks.push(check(
                "model",
                e.condition,
                "tbp_minus",
                r.tbp_minus,
                e.products.tbp_minus,
                Tolerance::Absolute(MODEL_TBP_MINUS_TOLERANCE),
            ));
        }
        checks.push(check(
            "model",
            e.condition,
            "tbp_y",
            r.tbp_y,
            e.products.tbp_y,
            Tolerance::Relative(MODEL_TBP_Y_TOLERANCE),
        ));
        checks.push(check("model", e.condition, "tbp_y", r.tbp_y, 1.0, Tolerance::Above(1.0)));
    }
    Ok(VerifyOutcome { checks })
}
