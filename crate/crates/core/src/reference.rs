//! Measured reference values for the three source conditions.

use serde::Serialize;

use crate::analysis::WidthReport;
use crate::model::PumpShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    A,
    B,
    C,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::A, Condition::B, Condition::C];

    pub fn label(self) -> &'static str {
        match self {
            Condition::A => "a",
            Condition::B => "b",
            Condition::C => "c",
        }
    }
}

/// Time-bandwidth products as printed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductRow {
    pub tbp_plus: f64,
    pub tbp_minus: f64,
    pub tbp_y: f64,
}

/// Reproduced widths as printed, THz and ps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthRow {
    pub dnu_y: f64,
    pub dnu_yc: f64,
    pub dtau_y: f64,
    pub dtau_yc: f64,
    pub dnu_plus: f64,
    pub dnu_minus: f64,
    pub dtau_plus: f64,
    pub dtau_minus: f64,
}

impl WidthRow {
    /// Products recomputed from the widths.
    pub fn products(&self) -> ProductRow {
        ProductRow {
            tbp_plus: self.dtau_plus * self.dnu_plus,
            tbp_minus: self.dtau_minus * self.dnu_minus,
            tbp_y: self.dtau_y * self.dnu_y,
        }
    }

    pub fn as_report(&self) -> WidthReport {
        let p = self.products();
        WidthReport {
            dnu_y: self.dnu_y,
            dnu_yc: self.dnu_yc,
            dnu_plus: self.dnu_plus,
            dnu_minus: self.dnu_minus,
            dtau_y: self.dtau_y,
            dtau_yc: self.dtau_yc,
            dtau_plus: self.dtau_plus,
            dtau_minus: self.dtau_minus,
            tbp_plus: p.tbp_plus,
            tbp_minus: p.tbp_minus,
            tbp_y: p.tbp_y,
        }
    }
}

/// Source settings of a condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceRow {
    pub pump_bandwidth_nm: f64,
    pub pump_shape: PumpShape,
    pub crystal_mm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceEntry {
    pub condition: Condition,
    pub source: SourceRow,
    pub products: ProductRow,
    pub widths: WidthRow,
}

pub const REFERENCE: [ReferenceEntry; 3] = [
    ReferenceEntry {
        condition: Condition::A,
        source: SourceRow {
            pump_bandwidth_nm: 2.8,
            pump_shape: PumpShape::GaussRect,
            crystal_mm: 30.0,
        },
        products: ProductRow {
            tbp_plus: 0.46,
            tbp_minus: 0.77,
            tbp_y: 3.4,
        },
        widths: WidthRow {
            dnu_y: 0.82,
            dnu_yc: 0.19,
            dtau_y: 4.2,
            dtau_yc: 0.54,
            dnu_plus: 1.2,
            dnu_minus: 0.13,
            dtau_plus: 0.38,
            dtau_minus: 5.9,
        },
    },
    ReferenceEntry {
        condition: Condition::B,
        source: SourceRow {
            pump_bandwidth_nm: 8.1,
            pump_shape: PumpShape::Gaussian,
            crystal_mm: 30.0,
        },
        products: ProductRow {
            tbp_plus: 0.49,
            tbp_minus: 0.85,
            tbp_y: 8.2,
        },
        widths: WidthRow {
            dnu_y: 1.9,
            dnu_yc: 0.21,
            dtau_y: 4.3,
            dtau_yc: 0.26,
            dnu_plus: 2.7,
            dnu_minus: 0.14,
            dtau_plus: 0.18,
            dtau_minus: 6.1,
        },
    },
    ReferenceEntry {
        condition: Condition::C,
        source: SourceRow {
            pump_bandwidth_nm: 8.1,
            pump_shape: PumpShape::Gaussian,
            crystal_mm: 10.0,
        },
        products: ProductRow {
            tbp_plus: 0.41,
            tbp_minus: 0.59,
            tbp_y: 2.2,
        },
        widths: WidthRow {
            dnu_y: 1.7,
            dnu_yc: 0.49,
            dtau_y: 1.3,
            dtau_yc: 0.25,
            dnu_plus: 2.3,
            dnu_minus: 0.33,
            dtau_plus: 0.18,
            dtau_minus: 1.8,
        },
    },
];

pub fn entry(condition: Condition) -> &'static ReferenceEntry {
    match condition {
        Condition::A => &REFERENCE[0],
        Condition::B => &REFERENCE[1],
        Condition::C => &REFERENCE[2],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_match_printed_values() {
        let b = entry(Condition::B).widths.products();
        assert!((b.tbp_plus - 0.486).abs() < 1e-12);
        let a = entry(Condition::A).widths.products();
        assert!((a.tbp_minus - 0.767).abs() < 1e-12);
        let c = entry(Condition::C).widths.products();
        assert!((c.tbp_minus - 0.594).abs() < 1e-12);
    }
}
