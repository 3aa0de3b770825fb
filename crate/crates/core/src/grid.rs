//! Centered sampled axes, 2D fields, and the 1D curves extracted from them.
//!
//! Every axis is symmetric about its `center`: sample `k` sits at
//! `center + (k - (n-1)/2) * step`. Frequency fields carry their absolute
//! carrier in `center`, and model functions are evaluated on the offset
//! from it.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "THz")]
    THz,
    #[serde(rename = "ps")]
    Ps,
    #[serde(rename = "nm")]
    Nm,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::THz => "THz",
            Unit::Ps => "ps",
            Unit::Nm => "nm",
        }
    }

    pub fn parse(s: &str) -> Option<Unit> {
        match s {
            "THz" => Some(Unit::THz),
            "ps" => Some(Unit::Ps),
            "nm" => Some(Unit::Nm),
            _ => None,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Uniformly sampled axis, symmetric about `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    center: f64,
    step: f64,
    n: usize,
    unit: Unit,
}

impl Axis {
    pub fn new(center: f64, step: f64, n: usize, unit: Unit) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::invalid(format!("axis center must be finite, got {center}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid(format!("axis step must be positive, got {step}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("axis needs at least 2 samples, got {n}")));
        }
        Ok(Axis { center, step, n, unit })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    /// Offset of sample `k` from the center.
    #[inline]
    pub fn offset(&self, k: usize) -> f64 {
        (k as f64 - (self.n as f64 - 1.0) * 0.5) * self.step
    }

    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        self.center + self.offset(k)
    }

    pub fn first(&self) -> f64 {
        self.coord(0)
    }

    pub fn last(&self) -> f64 {
        self.coord(self.n - 1)
    }

    pub fn span(&self) -> f64 {
        self.step * (self.n as f64 - 1.0)
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.coord(k)).collect()
    }

    pub fn offsets(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.offset(k)).collect()
    }

    /// Same axis with a different center.
    pub fn recentered(&self, center: f64) -> Axis {
        Axis { center, ..*self }
    }

    /// Fractional sample index of coordinate `x`.
    pub fn position(&self, x: f64) -> f64 {
        (x - self.center) / self.step + (self.n as f64 - 1.0) * 0.5
    }

    /// Index of the sample nearest to `x`; `x` must lie within the sampled range.
    pub fn nearest_index(&self, x: f64) -> Result<usize> {
        let tol = 1e-9 * self.step;
        if !(x >= self.first() - tol && x <= self.last() + tol) {
            return Err(Error::OutOfRange {
                what: "coordinate",
                value: x,
                min: self.first(),
                max: self.last(),
            });
        }
        let k = self.position(x).round().clamp(0.0, (self.n - 1) as f64);
        Ok(k as usize)
    }

    /// True when both axes share unit, size and step (to relative 1e-9).
    pub fn same_sampling(&self, other: &Axis) -> bool {
        self.unit == other.unit
            && self.n == other.n
            && (self.step - other.step).abs() <= 1e-9 * self.step.max(other.step)
    }
}

/// Axis with `n` samples spanning `span` (first to last sample) about `center`.
pub fn make_centered_axis(center: f64, span: f64, n: usize, unit: Unit) -> Result<Axis> {
    if !(span.is_finite() && span > 0.0) {
        return Err(Error::invalid(format!("span must be positive, got {span}")));
    }
    if n < 2 {
        return Err(Error::invalid(format!("axis needs at least 2 samples, got {n}")));
    }
    Axis::new(center, span / (n as f64 - 1.0), n, unit)
}

/// Selects one of the two lab axes of a [`Field2D`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisId {
    First,
    Second,
}

impl AxisId {
    pub fn other(self) -> AxisId {
        match self {
            AxisId::First => AxisId::Second,
            AxisId::Second => AxisId::First,
        }
    }
}

/// Rotated coordinate: `plus = (x + y)/√2`, `minus = (x - y)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rotated {
    Plus,
    Minus,
}

#[inline]
pub fn to_rotated(x: f64, y: f64) -> (f64, f64) {
    ((x + y) * FRAC_1_SQRT_2, (x - y) * FRAC_1_SQRT_2)
}

#[inline]
pub fn from_rotated(plus: f64, minus: f64) -> (f64, f64) {
    ((plus + minus) * FRAC_1_SQRT_2, (plus - minus) * FRAC_1_SQRT_2)
}

/// Element type stored in a [`Field2D`].
pub trait Sample: Copy + Send + Sync + 'static {
    fn is_finite_sample(&self) -> bool;
}

impl Sample for f64 {
    fn is_finite_sample(&self) -> bool {
        self.is_finite()
    }
}

impl Sample for Complex64 {
    fn is_finite_sample(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Values sampled on the product grid `axis_1 × axis_2`, row-major in `axis_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D<T = Complex64> {
    axis_1: Axis,
    axis_2: Axis,
    values: Vec<T>,
}

/// Real intensity map (magnitude squared already applied, or counts).
pub type Intensity2D = Field2D<f64>;

impl<T: Sample> Field2D<T> {
    pub fn new(axis_1: Axis, axis_2: Axis, values: Vec<T>) -> Result<Self> {
        if values.len() != axis_1.len() * axis_2.len() {
            return Err(Error::invalid(format!(
                "field has {} values, expected {}x{}",
                values.len(),
                axis_1.len(),
                axis_2.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite_sample()) {
            return Err(Error::invalid(format!(
                "non-finite field value at ({}, {})",
                pos / axis_2.len(),
                pos % axis_2.len()
            )));
        }
        Ok(Field2D { axis_1, axis_2, values })
    }

    /// Samples `f(x1, x2)` at every grid point (lab coordinates, not offsets).
    pub fn from_fn(axis_1: Axis, axis_2: Axis, f: impl Fn(f64, f64) -> T) -> Result<Self> {
        let c2 = axis_2.coords();
        let mut values = Vec::with_capacity(axis_1.len() * axis_2.len());
        for k1 in 0..axis_1.len() {
            let x1 = axis_1.coord(k1);
            values.extend(c2.iter().map(|&x2| f(x1, x2)));
        }
        Field2D::new(axis_1, axis_2, values)
    }

    pub fn axis_1(&self) -> &Axis {
        &self.axis_1
    }

    pub fn axis_2(&self) -> &Axis {
        &self.axis_2
    }

    pub fn axis(&self, id: AxisId) -> &Axis {
        match id {
            AxisId::First => &self.axis_1,
            AxisId::Second => &self.axis_2,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.axis_1.len(), self.axis_2.len())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, k1: usize, k2: usize) -> T {
        self.values[k1 * self.axis_2.len() + k2]
    }

    pub fn row(&self, k1: usize) -> &[T] {
        let n2 = self.axis_2.len();
        &self.values[k1 * n2..(k1 + 1) * n2]
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> Field2D<U> {
        Field2D {
            axis_1: self.axis_1,
            axis_2: self.axis_2,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Same values relabelled with new axes of identical sizes.
    pub fn with_axes(self, axis_1: Axis, axis_2: Axis) -> Result<Self> {
        if axis_1.len() != self.axis_1.len() || axis_2.len() != self.axis_2.len() {
            return Err(Error::invalid("replacement axes must keep the grid size"));
        }
        Ok(Field2D { axis_1, axis_2, ..self })
    }

    /// Sub-grid of samples whose offsets from each axis center lie within
    /// `±half_1` and `±half_2`. The result stays centered on the same center.
    pub fn crop_symmetric(&self, half_1: f64, half_2: f64) -> Result<Self> {
        let (lo1, n1) = symmetric_window(&self.axis_1, half_1)?;
        let (lo2, n2) = symmetric_window(&self.axis_2, half_2)?;
        let full_n2 = self.axis_2.len();
        let mut values = Vec::with_capacity(n1 * n2);
        for k1 in lo1..lo1 + n1 {
            let start = k1 * full_n2 + lo2;
            values.extend_from_slice(&self.values[start..start + n2]);
        }
        let axis_1 = Axis::new(self.axis_1.center, self.axis_1.step, n1, self.axis_1.unit)?;
        let axis_2 = Axis::new(self.axis_2.center, self.axis_2.step, n2, self.axis_2.unit)?;
        Ok(Field2D { axis_1, axis_2, values })
    }
}

fn symmetric_window(axis: &Axis, half: f64) -> Result<(usize, usize)> {
    let n = axis.len();
    if !(half > 0.0) {
        return Err(Error::invalid(format!("crop half-width must be positive, got {half}")));
    }
    // Drop the same number of samples from each end so the window stays centered.
    let mut drop = 0;
    while n - 2 * (drop + 1) >= 2 && axis.offset(drop).abs() > half * (1.0 + 1e-12) {
        drop += 1;
    }
    Ok((drop, n - 2 * drop))
}

impl Field2D<Complex64> {
    pub fn from_real(field: &Field2D<f64>) -> Self {
        field.map(|v| Complex64::new(v, 0.0))
    }

    /// `|A|²` at every sample.
    pub fn intensity(&self) -> Intensity2D {
        self.map(|v| v.norm_sqr())
    }

    pub fn magnitude(&self) -> Intensity2D {
        self.map(|v| v.norm())
    }

    pub fn peak_magnitude(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Copy scaled so the largest magnitude is 1.
    pub fn peak_normalized(&self) -> Self {
        let peak = self.peak_magnitude();
        if peak > 0.0 {
            self.map(|v| v / peak)
        } else {
            self.clone()
        }
    }
}

impl Field2D<f64> {
    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Copy scaled so the maximum is 1.
    pub fn peak_normalized(&self) -> Self {
        let peak = self.peak();
        if peak > 0.0 {
            self.map(|v| v / peak)
        } else {
            self.clone()
        }
    }

    /// Riemann sum of the samples times the cell area.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.axis_1.step * self.axis_2.step
    }

    /// Lab coordinates of the largest sample.
    pub fn argmax(&self) -> (usize, usize) {
        let (idx, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        (idx / self.axis_2.len(), idx % self.axis_2.len())
    }
}

/// Real sampled 1D function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    axis: Axis,
    values: Vec<f64>,
}

impl Curve {
    pub fn new(axis: Axis, values: Vec<f64>) -> Result<Self> {
        if values.len() != axis.len() {
            return Err(Error::invalid(format!(
                "curve has {} values for an axis of {} samples",
                values.len(),
                axis.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("curve values must be finite"));
        }
        Ok(Curve { axis, values })
    }

    pub fn from_fn(axis: Axis, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..axis.len()).map(|k| f(axis.coord(k))).collect();
        Curve::new(axis, values)
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.axis.step()
    }

    pub fn argmax(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
            .0
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Samples whose offset from the axis center is within `±half`.
    pub fn crop_symmetric(&self, half: f64) -> Result<Curve> {
        let (lo, n) = symmetric_window(&self.axis, half)?;
        let axis = Axis::new(self.axis.center(), self.axis.step(), n, self.axis.unit())?;
        Curve::new(axis, self.values[lo..lo + n].to_vec())
    }
}

/// Projection onto one lab axis: sum along the other axis times its step.
pub fn marginal(intensity: &Intensity2D, onto: AxisId) -> Curve {
    let (n1, n2) = intensity.dims();
    let values = match onto {
        AxisId::First => {
            let w = intensity.axis_2.step();
            (0..n1).map(|k1| intensity.row(k1).iter().sum::<f64>() * w).collect()
        }
        AxisId::Second => {
            let w = intensity.axis_1.step();
            let mut acc = vec![0.0; n2];
            for k1 in 0..n1 {
                for (a, v) in acc.iter_mut().zip(intensity.row(k1)) {
                    *a += v;
                }
            }
            acc.iter_mut().for_each(|a| *a *= w);
            acc
        }
    };
    Curve {
        axis: *intensity.axis(onto),
        values,
    }
}

/// Row or column nearest to coordinate `at` of the other axis.
pub fn cross_section(intensity: &Intensity2D, along: AxisId, at: f64) -> Result<Curve> {
    let k = intensity.axis(along.other()).nearest_index(at)?;
    let values = match along {
        AxisId::First => (0..intensity.axis_1.len()).map(|k1| intensity.get(k1, k)).collect(),
        AxisId::Second => intensity.row(k).to_vec(),
    };
    Ok(Curve {
        axis: *intensity.axis(along),
        values,
    })
}

/// Projection of a square, equal-step intensity map onto a rotated axis.
///
/// On a square lattice with step `h`, `x_i + x_j` and `x_i - x_j` take values
/// on a lattice of step `h`, so `plus`/`minus` are sampled exactly at
/// multiples of `h/√2`. Each output sample sums the lattice points on one
/// anti-diagonal (for `plus`) or diagonal (for `minus`); the weight `h√2` is
/// the Riemann measure along that line, so the projected mass equals the
/// field mass. No interpolation is involved.
pub fn diagonal_projection(intensity: &Intensity2D, sign: Rotated) -> Result<Curve> {
    let (a1, a2) = (intensity.axis_1, intensity.axis_2);
    if !a1.same_sampling(&a2) {
        return Err(Error::invalid(
            "diagonal projection needs a square grid with equal steps and units",
        ));
    }
    let n = a1.len();
    let h = a1.step();
    let mut values = vec![0.0; 2 * n - 1];
    match sign {
        Rotated::Plus => {
            for i in 0..n {
                for (j, v) in intensity.row(i).iter().enumerate() {
                    values[i + j] += v;
                }
            }
        }
        Rotated::Minus => {
            for i in 0..n {
                for (j, v) in intensity.row(i).iter().enumerate() {
                    values[i + n - 1 - j] += v;
                }
            }
        }
    }
    let weight = h * std::f64::consts::SQRT_2;
    values.iter_mut().for_each(|v| *v *= weight);
    let center = match sign {
        Rotated::Plus => (a1.center() + a2.center()) * FRAC_1_SQRT_2,
        Rotated::Minus => (a1.center() - a2.center()) * FRAC_1_SQRT_2,
    };
    let axis = Axis::new(center, h * FRAC_1_SQRT_2, 2 * n - 1, a1.unit())?;
    Curve::new(axis, values)
}
