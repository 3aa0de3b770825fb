//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use biphoton_duality::analysis::{correlation_sign, WidthReport};
use biphoton_duality::commands::{cmd_analyze, cmd_simulate, cmd_verify, AnalyzeInputs, Which};
use biphoton_duality::config::{CalibrationBlock, RunConfig};
use biphoton_duality::grid::{make_centered_axis, Axis, Field2D, Unit};
use biphoton_duality::instrument::{SpectrometerConfig, UpconversionConfig};
use biphoton_duality::model::{analytic_jta, calibrate, jsa, wavelength_bw_to_frequency_bw, BiphotonModel};
use biphoton_duality::pipeline::{model_report, run_model, GridPlan};
use biphoton_duality::reference::{entry, Condition, REFERENCE};
use biphoton_duality::transform::{dft1, dft2, Direction};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn calibrated(c: Condition) -> BiphotonModel {
    let w = entry(c).widths;
    calibrate(w.dnu_plus, w.dnu_minus).unwrap()
}

fn gaussian_models() -> Vec<(String, BiphotonModel)> {
    let mut v: Vec<_> = Condition::ALL
        .iter()
        .map(|&c| (format!("row {}", c.label()), calibrated(c)))
        .collect();
    v.push(("a=0.04 b=4".into(), BiphotonModel::gaussian(0.04, 4.0).unwrap()));
    v
}

/// Largest deviation of |dft2(jsa)| from the closed-form temporal amplitude
/// on an n² grid, skipping samples within `guard` steps of the rect edge.
/// Magnitudes are peak-normalized, or divided by the closed-form scale
/// π^1.5/(2b√a) when `absolute` is set.
fn oracle_error(a: f64, b: f64, n: usize, guard: f64, absolute: bool) -> f64 {
    let model = BiphotonModel::gaussian(a, b).unwrap();
    // Pump amplitude is below 1e-16 at the grid edge along each axis.
    let span = 2.0 * (40.0 / a).sqrt();
    let nu = make_centered_axis(0.0, span, n, Unit::THz).unwrap();
    let jta = dft2(&jsa(&model, &nu, &nu).unwrap(), Direction::FreqToTime).unwrap();
    let mag = if absolute {
        let scale = PI.powf(1.5) / (2.0 * b * a.sqrt());
        jta.magnitude().map(|v| v / scale)
    } else {
        jta.peak_normalized().magnitude()
    };
    let t = *jta.axis_1();
    let exact = analytic_jta(&model, &t, jta.axis_2()).unwrap();
    let edge = b / PI;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = t.coord(i) - jta.axis_2().coord(j);
            if (d.abs() - edge).abs() <= guard * t.step() {
                continue;
            }
            worst = worst.max((mag.get(i, j) - exact.get(i, j).re).abs());
        }
    }
    worst
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let errs: Vec<(f64, f64, f64)> = [(0.0951, 14.06), (0.04, 4.0)]
        .iter()
        .map(|&(a, b)| (a, b, oracle_error(a, b, 512, 1.0, false)))
        .collect();
    let elapsed = start.elapsed().as_secs_f64() / errs.len() as f64;
    // Truncation ringing of the sinc: it lifts the peak above the plateau and
    // decays roughly as 1/distance from the edge.
    let near = oracle_error(0.0951, 14.06, 512, 1.0, true);
    let far = oracle_error(0.0951, 14.06, 512, 20.0, true);
    let pass = errs.iter().all(|e| e.2 <= 1e-6) && elapsed < 1.0;
    let detail = errs
        .iter()
        .map(|(a, b, e)| format!("a={a} b={b}: {e:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::new(pass, format!("rel L∞ {detail} (limit 1e-6); absolute scale {near:.1e} / {far:.1e} beyond 1 / 20 steps; {elapsed:.2} s per model at 512²"))
}

fn reports() -> Vec<(String, WidthReport)> {
    gaussian_models()
        .into_iter()
        .map(|(name, m)| (name, model_report(&m).unwrap()))
        .collect()
}

fn criterion_2(reports: &[(String, WidthReport)]) -> Outcome {
    let target = 2.0 * LN_2 / PI;
    let pass = reports.iter().all(|(_, r)| (r.tbp_plus - target).abs() <= 0.01);
    let detail = reports
        .iter()
        .map(|(n, r)| format!("{n}: {:.4}", r.tbp_plus))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::new(pass, format!("tbp_plus {detail} (target {target:.4} ± 0.01)"))
}

fn criterion_3(reports: &[(String, WidthReport)]) -> Outcome {
    let target = 2.78311 / PI;
    let pass = reports.iter().all(|(_, r)| (r.tbp_minus - target).abs() <= 0.02);
    let detail = reports
        .iter()
        .map(|(n, r)| format!("{n}: {:.4}", r.tbp_minus))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::new(pass, format!("tbp_minus {detail} (target {target:.4} ± 0.02)"))
}

fn criterion_4() -> Outcome {
    let outcome = cmd_verify().unwrap();
    let products: Vec<_> = outcome.checks.iter().filter(|c| c.group == "product").collect();
    let pass = products.len() == 9 && products.iter().all(|c| (c.value - c.expected).abs() <= 0.05);
    let worst = products.iter().map(|c| (c.value - c.expected).abs()).fold(0.0, f64::max);
    Outcome::new(pass, format!("{} product checks, worst deviation {worst:.3} (limit 0.05)", products.len()))
}

fn criterion_5(reports: &[(String, WidthReport)]) -> Outcome {
    let r = &reports[1].1;
    let e_plus = (r.dtau_plus - 0.18).abs() / 0.18;
    let e_minus = (r.dtau_minus - 6.1).abs() / 6.1;
    Outcome::new(
        e_plus <= 0.15 && e_minus <= 0.10,
        format!(
            "dtau_plus {:.4} ps ({:.1}% of 0.18, limit 15%), dtau_minus {:.3} ps ({:.1}% of 6.1, limit 10%)",
            r.dtau_plus,
            100.0 * e_plus,
            r.dtau_minus,
            100.0 * e_minus
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for c in Condition::ALL {
        let m = calibrated(c);
        let run = run_model(&m, &GridPlan::auto(&m)).unwrap();
        let ct = correlation_sign(&run.tsi).unwrap();
        let cu = correlation_sign(&run.tti).unwrap();
        pass &= ct > 0.5 && cu < -0.5;
        parts.push(format!("{}: tsi {ct:+.3} tti {cu:+.3}", c.label()));
    }
    Outcome::new(pass, parts.join(", "))
}

fn criterion_7(reports: &[(String, WidthReport)]) -> Outcome {
    let rows = &reports[..3];
    let above = rows.iter().all(|(_, r)| r.tbp_y > 1.0);
    let b = rows[1].1.tbp_y;
    let rel = (b - 8.2).abs() / 8.2;
    let detail = rows
        .iter()
        .map(|(n, r)| format!("{n}: {:.3}", r.tbp_y))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::new(
        above && rel <= 0.25,
        format!("tbp_y {detail}; row b {:.1}% from 8.2 (limit 25%)", 100.0 * rel),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let cfg = RunConfig {
        seed: Some(42),
        calibration: Some(CalibrationBlock {
            dnu_plus: 2.7,
            dnu_minus: 0.14,
        }),
        spectrometer: SpectrometerConfig {
            scan_step: 0.25,
            steps_per_axis: 192,
            pair_rate_peak: 5.0e4,
            ..Default::default()
        },
        upconversion: UpconversionConfig {
            pair_rate_peak: 4000.0,
            ..Default::default()
        },
        ..Default::default()
    };
    let run = cfg.resolve().unwrap();
    let noiseless = model_report(&run.model).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let sim = cmd_simulate(&run, Which::Both, dir.path()).unwrap();
    let peak = |s: &Option<biphoton_duality::instrument::ScanResult>| {
        let s = s.as_ref().unwrap();
        *s.counts.iter().max().unwrap() as f64 - s.floor()
    };
    let (peak_tsi, peak_tti) = (peak(&sim.tsi), peak(&sim.tti));
    let inputs = AnalyzeInputs::from_dir(dir.path()).unwrap();
    let out = cmd_analyze(&inputs, &dir.path().join("analysis")).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let got = out.analysis.report.widths();
    let want = noiseless.widths();
    let mut worst = (0.0, "");
    for (k, name) in WidthReport::WIDTH_NAMES.iter().enumerate() {
        let e = (got[k] - want[k]).abs() / want[k];
        if e > worst.0 {
            worst = (e, name);
        }
    }
    let pass = worst.0 <= 0.05 && peak_tsi >= 200.0 && peak_tti >= 200.0 && elapsed < 60.0;
    Outcome::new(
        pass,
        format!(
            "worst width {} off by {:.2}% (limit 5%); peak counts tsi {peak_tsi:.0} tti {peak_tti:.0}; {elapsed:.1} s",
            worst.1,
            100.0 * worst.0
        ),
    )
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn energy(f: &Field2D) -> f64 {
    f.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * f.axis_1().step() * f.axis_2().step()
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut worst_parseval: f64 = 0.0;
    let mut worst_round: f64 = 0.0;

    let fields: Vec<Field2D> = {
        let mut v = Vec::new();
        for c in Condition::ALL {
            let m = calibrated(c);
            let plan = GridPlan::auto(&m);
            let ax = Axis::new(plan.center_thz, plan.step_thz(), plan.n, Unit::THz).unwrap();
            v.push(jsa(&m, &ax, &ax).unwrap());
        }
        // Deterministic pseudo-random fields on odd and even sizes.
        for &(n1, n2) in &[(64usize, 96usize), (127, 65), (256, 256)] {
            let a1 = Axis::new(0.0, 0.05, n1, Unit::THz).unwrap();
            let a2 = Axis::new(0.0, 0.07, n2, Unit::THz).unwrap();
            let f = Field2D::from_fn(a1, a2, |x, y| {
                Complex64::new((17.0 * x + 3.0 * y * y).sin(), (5.0 * x * y + 1.3).cos())
            })
            .unwrap();
            v.push(f);
        }
        v
    };
    for f in &fields {
        let g = dft2(f, Direction::FreqToTime).unwrap();
        let (e_in, e_out) = (energy(f), energy(&g));
        worst_parseval = worst_parseval.max((e_in - e_out).abs() / e_in);
        let back = dft2(&g, Direction::TimeToFreq).unwrap();
        let diff: Vec<Complex64> = back.values().iter().zip(f.values()).map(|(x, y)| x - y).collect();
        worst_round = worst_round.max(max_abs(&diff) / max_abs(f.values()));
    }

    let axis = make_centered_axis(0.0, 16.0, 1024, Unit::THz).unwrap();
    let g: Vec<Complex64> = axis.coords().iter().map(|&x| Complex64::new((-PI * x * x).exp(), 0.0)).collect();
    let (t, out) = dft1(&g, &axis, Direction::FreqToTime).unwrap();
    let self_dual = t
        .coords()
        .iter()
        .zip(&out)
        .map(|(&x, z)| (z - Complex64::new((-PI * x * x).exp(), 0.0)).norm())
        .fold(0.0, f64::max);

    let elapsed = start.elapsed();
    let pass = worst_parseval <= 1e-9 && worst_round <= 1e-10 && self_dual <= 1e-9 && elapsed < Duration::from_secs(10);
    Outcome::new(
        pass,
        format!(
            "Parseval {worst_parseval:.1e} (1e-9), round trip {worst_round:.1e} (1e-10), self-dual {self_dual:.1e} (1e-9); {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_10() -> Outcome {
    let full = wavelength_bw_to_frequency_bw(792.0, 8.1);
    let plus = full / SQRT_2;
    let reference = REFERENCE[1].widths.dnu_plus;
    let rel = (plus - reference).abs() / reference;
    let pass = (full - 3.87).abs() < 0.005 && (plus - 2.74).abs() < 0.005 && rel <= 0.02;
    Outcome::new(
        pass,
        format!("{full:.3} THz, /√2 = {plus:.3} THz, {:.2}% from {reference} (limit 2%)", 100.0 * rel),
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        }
    }
}

fn main() -> ExitCode {
    // Accept and ignore the arguments the test runner passes through.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let reports = reports();
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome + '_>)> = vec![
        ("oracle equivalence", Box::new(criterion_1)),
        ("gaussian TBP limit", Box::new(|| criterion_2(&reports))),
        ("sinc/rect TBP limit", Box::new(|| criterion_3(&reports))),
        ("reference table consistency", Box::new(criterion_4)),
        ("case-b end to end", Box::new(|| criterion_5(&reports))),
        ("correlation inversion", Box::new(criterion_6)),
        ("classical non-limit", Box::new(|| criterion_7(&reports))),
        ("scan round trip", Box::new(criterion_8)),
        ("transform properties", Box::new(criterion_9)),
        ("pump conversion", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.into_iter().enumerate() {
        let o = guarded(f);
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {} {name}: {}",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("\nacceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
