//! Heatmap and curve CSV files, and JSON reports.
//!
//! Heatmap layout: an optional `# key=value ...` comment line, then a row
//! whose first cell is the unit and whose other cells are axis-2
//! coordinates, then one row per axis-1 coordinate.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{NamedCurve, WidthReport};
use crate::error::{Error, Result};
use crate::grid::{Axis, Intensity2D, Unit};

/// Metadata carried on a heatmap's comment line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HeatmapMeta(pub BTreeMap<String, String>);

impl HeatmapMeta {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }
}

fn axis_tag(a: &Axis) -> String {
    format!("{}:{}:{}", a.center(), a.step(), a.len())
}

fn parse_axis_tag(tag: &str, unit: Unit) -> Option<Axis> {
    let mut it = tag.split(':');
    let center = it.next()?.parse().ok()?;
    let step = it.next()?.parse().ok()?;
    let n = it.next()?.parse().ok()?;
    Axis::new(center, step, n, unit).ok()
}

/// Renders a heatmap; values use the shortest representation that parses
/// back to the same number.
pub fn heatmap_to_string(field: &Intensity2D, meta: &HeatmapMeta) -> String {
    let mut meta = meta.clone();
    meta.0.insert("axis1".into(), axis_tag(field.axis_1()));
    meta.0.insert("axis2".into(), axis_tag(field.axis_2()));
    let (n1, n2) = field.dims();
    let mut s = String::with_capacity(n1 * n2 * 12);
    s.push('#');
    for (k, v) in &meta.0 {
        let _ = write!(s, " {k}={v}");
    }
    s.push('\n');
    s.push_str(field.axis_1().unit().as_str());
    for x in field.axis_2().coords() {
        let _ = write!(s, ",{x}");
    }
    s.push('\n');
    for (k, x) in field.axis_1().coords().iter().enumerate() {
        let _ = write!(s, "{x}");
        for v in field.row(k) {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

pub fn write_heatmap(path: &Path, field: &Intensity2D, meta: &HeatmapMeta) -> Result<()> {
    std::fs::write(path, heatmap_to_string(field, meta)).map_err(|e| Error::io(path, e))
}

fn axis_from_coords(coords: &[f64], unit: Unit) -> Option<Axis> {
    let n = coords.len();
    if n < 2 {
        return None;
    }
    let (first, last) = (coords[0], coords[n - 1]);
    Axis::new(0.5 * (first + last), (last - first) / (n - 1) as f64, n, unit).ok()
}

fn coords_match(axis: &Axis, coords: &[f64]) -> bool {
    coords.len() == axis.len()
        && coords
            .iter()
            .enumerate()
            .all(|(k, &x)| (x - axis.coord(k)).abs() <= 1e-6 * axis.step() + 1e-12 * axis.center().abs())
}

pub fn heatmap_from_str(text: &str, path: &Path) -> Result<(Intensity2D, HeatmapMeta)> {
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let num = |line: usize, cell: &str| -> Result<f64> {
        cell.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| perr(line, format!("`{}` is not a finite number", cell.trim())))
    };

    let mut meta = HeatmapMeta::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    while let Some((_, l)) = lines.peek() {
        if let Some(rest) = l.trim_start().strip_prefix('#') {
            for pair in rest.split_whitespace() {
                if let Some((k, v)) = pair.split_once('=') {
                    meta.0.insert(k.to_string(), v.to_string());
                }
            }
            lines.next();
        } else if l.trim().is_empty() {
            lines.next();
        } else {
            break;
        }
    }

    let (hline, header) = lines.next().ok_or_else(|| perr(1, "missing coordinate row".into()))?;
    let mut cells = header.split(',');
    let unit_cell = cells.next().unwrap_or("").trim();
    let unit = Unit::parse(unit_cell).ok_or_else(|| perr(hline, format!("unknown unit `{unit_cell}`")))?;
    let coords_2: Vec<f64> = cells.map(|c| num(hline, c)).collect::<Result<_>>()?;

    let mut coords_1 = Vec::new();
    let mut values = Vec::with_capacity(coords_2.len() * coords_2.len());
    for (ln, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let mut cells = l.split(',');
        coords_1.push(num(ln, cells.next().unwrap_or(""))?);
        let before = values.len();
        for c in cells {
            values.push(num(ln, c)?);
        }
        let got = values.len() - before;
        if got != coords_2.len() {
            return Err(perr(ln, format!("expected {} values, found {got}", coords_2.len())));
        }
    }

    let axis_for = |key: &str, coords: &[f64], line: usize| -> Result<Axis> {
        let axis = meta
            .get(key)
            .and_then(|t| parse_axis_tag(t, unit))
            .or_else(|| axis_from_coords(coords, unit))
            .ok_or_else(|| perr(line, format!("{key} needs at least two coordinates")))?;
        if !coords_match(&axis, coords) {
            return Err(perr(line, format!("{key} coordinates are not uniformly spaced")));
        }
        Ok(axis)
    };
    let axis_2 = axis_for("axis2", &coords_2, hline)?;
    let axis_1 = axis_for("axis1", &coords_1, hline + 1)?;
    let field = Intensity2D::new(axis_1, axis_2, values).map_err(|e| perr(hline, e.to_string()))?;
    Ok((field, meta))
}

pub fn read_heatmap(path: &Path) -> Result<(Intensity2D, HeatmapMeta)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    heatmap_from_str(&text, path)
}

/// Long-format table of named curves: `curve,unit,coordinate,value`.
pub fn curves_to_string(curves: &[NamedCurve]) -> String {
    let mut s = String::from("curve,unit,coordinate,value\n");
    for c in curves {
        let unit = c.curve.axis().unit();
        for (x, v) in c.curve.axis().coords().iter().zip(c.curve.values()) {
            let _ = writeln!(s, "{},{unit},{x},{v}", c.name);
        }
    }
    s
}

pub fn write_curves(path: &Path, curves: &[NamedCurve]) -> Result<()> {
    std::fs::write(path, curves_to_string(curves)).map_err(|e| Error::io(path, e))
}

/// Rounds to six significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// Report with every value rounded to six significant digits.
pub fn rounded_report(r: &WidthReport) -> WidthReport {
    WidthReport {
        dnu_y: round_sig6(r.dnu_y),
        dnu_yc: round_sig6(r.dnu_yc),
        dnu_plus: round_sig6(r.dnu_plus),
        dnu_minus: round_sig6(r.dnu_minus),
        dtau_y: round_sig6(r.dtau_y),
        dtau_yc: round_sig6(r.dtau_yc),
        dtau_plus: round_sig6(r.dtau_plus),
        dtau_minus: round_sig6(r.dtau_minus),
        tbp_plus: round_sig6(r.tbp_plus),
        tbp_minus: round_sig6(r.tbp_minus),
        tbp_y: round_sig6(r.tbp_y),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_report(path: &Path, report: &WidthReport) -> Result<()> {
    write_json(path, &rounded_report(report))
}

pub fn read_report(path: &Path) -> Result<WidthReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_centered_axis;

    #[test]
    fn heatmap_round_trip_is_byte_identical() {
        let a1 = make_centered_axis(189.26, 3.0, 7, Unit::THz).unwrap();
        let a2 = make_centered_axis(189.26, 2.0, 5, Unit::THz).unwrap();
        let f = Intensity2D::from_fn(a1, a2, |x, y| ((x - 189.0) * (y - 189.5)).sin().abs() / 3.0).unwrap();
        let meta = HeatmapMeta::new().with("quantity", "tsi").with("normalization", "peak");
        let s1 = heatmap_to_string(&f, &meta);
        let (g, m) = heatmap_from_str(&s1, Path::new("x.csv")).unwrap();
        assert_eq!(g, f);
        assert_eq!(m.get("quantity"), Some("tsi"));
        let s2 = heatmap_to_string(&g, &m);
        assert_eq!(s1, s2);
    }

    #[test]
    fn heatmap_without_comment_uses_coordinates() {
        let text = "ps,-1,0,1\n-0.5,1,2,3\n0.5,4,5,6\n";
        let (f, _) = heatmap_from_str(text, Path::new("x.csv")).unwrap();
        assert_eq!(f.dims(), (2, 3));
        assert_eq!(f.axis_1().unit(), Unit::Ps);
        assert_eq!(f.get(1, 2), 6.0);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let text = "# quantity=x\nps,-1,0,1\n-0.5,1,2,3\n0.5,4,oops,6\n";
        match heatmap_from_str(text, Path::new("x.csv")) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 4);
                assert!(message.contains("oops"));
            }
            other => panic!("{other:?}"),
        }
        let short = "ps,-1,0,1\n-0.5,1,2\n";
        assert!(matches!(heatmap_from_str(short, Path::new("x.csv")), Err(Error::Parse { line: 2, .. })));
        let uneven = "ps,-1,0,3\n-0.5,1,2,3\n0.5,4,5,6\n";
        assert!(matches!(heatmap_from_str(uneven, Path::new("x.csv")), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn rounding_keeps_six_digits() {
        assert_eq!(round_sig6(0.441_145_478_4), 0.441145);
        assert_eq!(round_sig6(8.613_921_02), 8.61392);
        assert_eq!(round_sig6(0.0), 0.0);
    }
}
