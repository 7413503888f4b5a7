//! CSV emission: `.` decimal separator, `,` field separator, LF line ends.
//! Floats use Rust's shortest round-trip formatting.

use std::fmt::Write as _;

use hyperdim_core::dimension::{DimensionEstimate, MinkowskiSample};
use hyperdim_core::pressure::{CurveSample, VolumeCurve};

pub struct Table {
    out: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Self { out }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            match c {
                Cell::F(x) => write!(self.out, "{}", fmt_float(*x)).unwrap(),
                Cell::U(n) => write!(self.out, "{n}").unwrap(),
                Cell::S(s) => self.out.push_str(s),
            }
        }
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

pub enum Cell<'a> {
    F(f64),
    U(u64),
    S(&'a str),
}

/// `Display` for f64 never uses locale or exponent-free padding; map the
/// non-finite values to fixed tokens.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// `k,vol,log_vol,band`
pub fn volume_curve(curve: &VolumeCurve) -> String {
    let mut t = Table::new(&["k", "vol", "log_vol", "band"]);
    for p in &curve.points {
        t.row(&[Cell::U(p.k as u64), Cell::F(p.volume), Cell::F(p.volume.ln()), Cell::F(p.band)]);
    }
    t.finish()
}

/// `k,z,log_z`
pub fn partition_curve(raw: &[CurveSample]) -> String {
    let mut t = Table::new(&["k", "z", "log_z"]);
    for s in raw {
        t.row(&[Cell::U(s.k as u64), Cell::F(s.value), Cell::F(s.value.ln())]);
    }
    t.finish()
}

/// `scale,count,log_inv_scale,log_count,fitted`
pub fn dimension(est: &DimensionEstimate) -> String {
    let mut t = Table::new(&["scale", "count", "log_inv_scale", "log_count", "fitted"]);
    for (i, (&s, &c)) in est.scales.iter().zip(&est.counts).enumerate() {
        t.row(&[
            Cell::F(s),
            Cell::U(c),
            Cell::F(-s.ln()),
            Cell::F((c as f64).ln()),
            Cell::U((i >= est.excluded) as u64),
        ]);
    }
    t.finish()
}

/// `rho,volume,ratio`
pub fn minkowski(samples: &[MinkowskiSample]) -> String {
    let mut t = Table::new(&["rho", "volume", "ratio"]);
    for s in samples {
        t.row(&[Cell::F(s.rho), Cell::F(s.volume), Cell::F(s.ratio)]);
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_fixed() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.row(&[Cell::F(0.1), Cell::U(7), Cell::F(-1.5e-12)]);
        t.row(&[Cell::F(f64::NEG_INFINITY), Cell::S("x"), Cell::F(2.0)]);
        assert_eq!(t.finish(), "a,b,c\n0.1,7,-0.0000000000015\n-inf,x,2\n");
    }

    #[test]
    fn dimension_columns() {
        let est = hyperdim_core::dimension::box_dimension(
            &(2..=7).map(|m| (3f64.powi(-m), 1u64 << m)).collect::<Vec<_>>(),
        )
        .unwrap();
        let text = dimension(&est);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "scale,count,log_inv_scale,log_count,fitted");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].ends_with(",0") && lines[3].ends_with(",1"));
        assert!(!text.contains('\r'));
    }
}
