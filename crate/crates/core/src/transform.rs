//! Centered discrete Fourier transforms between THz and ps grids.
//!
//! For `n` samples at offsets `(k - (n-1)/2)·Δ` the output lives on the
//! conjugate grid `(m - (n-1)/2)/(nΔ)`, centered at zero. The forward
//! (frequency to time) kernel is `exp(-2πiνt)`, the inverse `exp(+2πiνt)`,
//! and both are scaled by the input step, so the sum approximates the
//! continuous integral and a forward/inverse pair is the identity.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, Field2D, Unit};

/// Edge-to-peak magnitude ratio above which a transform input is likely
/// truncated.
pub const ALIASING_EDGE_RATIO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    FreqToTime,
    TimeToFreq,
}

impl Direction {
    fn input_unit(self) -> Unit {
        match self {
            Direction::FreqToTime => Unit::THz,
            Direction::TimeToFreq => Unit::Ps,
        }
    }

    fn output_unit(self) -> Unit {
        match self {
            Direction::FreqToTime => Unit::Ps,
            Direction::TimeToFreq => Unit::THz,
        }
    }

    pub fn inverse(self) -> Direction {
        match self {
            Direction::FreqToTime => Direction::TimeToFreq,
            Direction::TimeToFreq => Direction::FreqToTime,
        }
    }
}

/// Conjugate axis: step `1/(n·step)`, centered at zero, unit swapped.
pub fn conjugate_axis(axis: &Axis, direction: Direction) -> Result<Axis> {
    if axis.unit() != direction.input_unit() {
        return Err(Error::invalid(format!(
            "{direction:?} transform expects {} input, got {}",
            direction.input_unit(),
            axis.unit()
        )));
    }
    let n = axis.len();
    Axis::new(0.0, 1.0 / (n as f64 * axis.step()), n, direction.output_unit())
}

/// Input and output grids of a 2D transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformPlan {
    pub direction: Direction,
    pub input: (Axis, Axis),
    pub output: (Axis, Axis),
}

impl TransformPlan {
    pub fn new(axis_1: &Axis, axis_2: &Axis, direction: Direction) -> Result<Self> {
        Ok(TransformPlan {
            direction,
            input: (*axis_1, *axis_2),
            output: (conjugate_axis(axis_1, direction)?, conjugate_axis(axis_2, direction)?),
        })
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.input.0.len(), self.input.1.len())
    }
}

/// One centered 1D transform of fixed length, reusable across rows.
struct CenteredDft {
    fft: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
}

impl CenteredDft {
    fn new(planner: &mut FftPlanner<f64>, n: usize, direction: Direction, step: f64) -> Self {
        // With h = (n-1)/2, (k-h)(m-h) = km - hk - hm + h²; the cross terms
        // become pre/post twiddles around a standard FFT. Phases are reduced
        // in integer arithmetic to keep them exact for large n.
        let sign = match direction {
            Direction::FreqToTime => -1.0,
            Direction::TimeToFreq => 1.0,
        };
        let fft = match direction {
            Direction::FreqToTime => planner.plan_fft_forward(n),
            Direction::TimeToFreq => planner.plan_fft_inverse(n),
        };
        let n64 = n as u128;
        let two_n = 2 * n64;
        let twiddle = |k: usize| {
            let r = ((n64 - 1) * k as u128) % two_n;
            let phase = -sign * std::f64::consts::PI * r as f64 / n as f64;
            Complex64::from_polar(1.0, phase)
        };
        let r_h2 = ((n64 - 1) * (n64 - 1)) % (4 * n64);
        let global = Complex64::from_polar(step, sign * 2.0 * std::f64::consts::PI * r_h2 as f64 / (4.0 * n as f64));
        let pre: Vec<Complex64> = (0..n).map(twiddle).collect();
        let post: Vec<Complex64> = pre.iter().map(|t| t * global).collect();
        CenteredDft { fft, pre, post }
    }

    fn scratch_len(&self) -> usize {
        self.fft.get_inplace_scratch_len()
    }

    fn apply(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        for (d, p) in data.iter_mut().zip(&self.pre) {
            *d *= p;
        }
        self.fft.process_with_scratch(data, scratch);
        for (d, p) in data.iter_mut().zip(&self.post) {
            *d *= p;
        }
    }

    fn apply_rows(&self, data: &mut [Complex64], row_len: usize) {
        let scratch_len = self.scratch_len();
        data.par_chunks_mut(row_len).for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, row| self.apply(row, scratch),
        );
    }
}

/// Transforms samples on `axis` to the conjugate axis.
pub fn dft1(values: &[Complex64], axis: &Axis, direction: Direction) -> Result<(Axis, Vec<Complex64>)> {
    if values.len() != axis.len() {
        return Err(Error::invalid(format!(
            "{} samples given for an axis of {}",
            values.len(),
            axis.len()
        )));
    }
    let out_axis = conjugate_axis(axis, direction)?;
    let mut planner = FftPlanner::new();
    let plan = CenteredDft::new(&mut planner, axis.len(), direction, axis.step());
    let mut data = values.to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.scratch_len()];
    plan.apply(&mut data, &mut scratch);
    Ok((out_axis, data))
}

/// Warning raised when a transform input does not decay at the grid edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliasingWarning {
    pub edge_ratio: f64,
}

/// Largest edge magnitude divided by the largest magnitude overall.
pub fn edge_ratio(field: &Field2D) -> f64 {
    let (n1, n2) = field.dims();
    let peak = field.peak_magnitude();
    if peak == 0.0 {
        return 0.0;
    }
    let mut edge: f64 = 0.0;
    for k2 in 0..n2 {
        edge = edge.max(field.get(0, k2).norm()).max(field.get(n1 - 1, k2).norm());
    }
    for k1 in 0..n1 {
        edge = edge.max(field.get(k1, 0).norm()).max(field.get(k1, n2 - 1).norm());
    }
    edge / peak
}

/// 2D transform plus a sampling diagnostic for the input.
pub fn dft2_with_diagnostics(field: &Field2D, direction: Direction) -> Result<(Field2D, Option<AliasingWarning>)> {
    let plan = TransformPlan::new(field.axis_1(), field.axis_2(), direction)?;
    let ratio = edge_ratio(field);
    let warning = (ratio > ALIASING_EDGE_RATIO).then_some(AliasingWarning { edge_ratio: ratio });

    let (n1, n2) = plan.sizes();
    let mut planner = FftPlanner::new();
    let along_2 = CenteredDft::new(&mut planner, n2, direction, field.axis_2().step());
    let along_1 = CenteredDft::new(&mut planner, n1, direction, field.axis_1().step());

    let mut data = field.values().to_vec();
    along_2.apply_rows(&mut data, n2);
    let mut transposed = transpose(&data, n1, n2);
    along_1.apply_rows(&mut transposed, n1);
    let data = transpose(&transposed, n2, n1);

    let out = Field2D::new(plan.output.0, plan.output.1, data)?;
    Ok((out, warning))
}

/// 2D transform applied separably along both axes. Logs a warning when the
/// input has not decayed at the grid edge.
pub fn dft2(field: &Field2D, direction: Direction) -> Result<Field2D> {
    let (out, warning) = dft2_with_diagnostics(field, direction)?;
    if let Some(w) = warning {
        log::warn!(
            "transform input edge magnitude is {:.2e} of peak; the result may be aliased",
            w.edge_ratio
        );
    }
    Ok(out)
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    const BLOCK: usize = 32;
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                for c in cb..(cb + BLOCK).min(cols) {
                    out[c * rows + r] = data[r * cols + c];
                }
            }
        }
    }
    out
}
